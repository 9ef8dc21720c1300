"""Element arithmetic for the group instances handled by the toolkit.

Covers reduced words in the rank-2 free group, finite groups given by
multiplication tables, the integer Heisenberg group, Abels' 4x4 matrix
group over the ring of integers with a prime inverted, and congruence
quotients of the latter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "LETTERS",
    "FreeWord",
    "free_word",
    "PAdicLaurent",
    "AbelsElement",
    "HeisenbergElement",
    "CenterMembership",
    "center_membership",
    "FiniteGroup",
    "GroupAxiomReport",
    "verify_group_axioms",
    "cyclic_group",
    "mulclose",
    "group_from_elements",
    "heisenberg_mod",
    "CongruenceQuotient",
    "multiplicative_order",
    "parse_element_lines",
    "element_to_line",
]


# ---------------------------------------------------------------------------
# Free group on two generators
# ---------------------------------------------------------------------------

#: Letter codes.  The BFS/lexicographic order of the toolkit is a < b < A < B
#: where capital letters denote inverses.
LETTERS = ("a", "b", "A", "B")
_INVERSE = (2, 3, 0, 1)
_CODE = {c: i for i, c in enumerate(LETTERS)}


def _reduce_codes(codes: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for c in codes:
        if stack and stack[-1] == _INVERSE[c]:
            stack.pop()
        else:
            stack.append(c)
    return tuple(stack)


class FreeWord:
    """A reduced word over {a, b, a^-1, b^-1}.

    Instances are immutable; ``*`` performs reduced concatenation.
    """

    __slots__ = ("codes",)

    def __init__(self, codes: Iterable[int] = (), *, _reduced: bool = False):
        codes = tuple(codes)
        if not _reduced:
            codes = _reduce_codes(codes)
        object.__setattr__(self, "codes", codes)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("FreeWord is immutable")

    def __len__(self) -> int:
        return len(self.codes)

    def __hash__(self) -> int:
        return hash(self.codes)

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeWord) and self.codes == other.codes

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        left = list(self.codes)
        for c in other.codes:
            if left and left[-1] == _INVERSE[c]:
                left.pop()
            else:
                left.append(c)
        return FreeWord(left, _reduced=True)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(_INVERSE[c] for c in reversed(self.codes)), _reduced=True)

    @property
    def is_identity(self) -> bool:
        return not self.codes

    def first_letter(self) -> str | None:
        return LETTERS[self.codes[0]] if self.codes else None

    def sort_key(self):
        return self.codes

    def __str__(self) -> str:
        return "".join(LETTERS[c] for c in self.codes) if self.codes else "e"

    def __repr__(self) -> str:
        return f"FreeWord({str(self)!r})"


def free_word(text: str) -> FreeWord:
    """Parse a word from its letter string; ``e`` or the empty string is the identity."""
    text = text.strip()
    if text in ("", "e"):
        return FreeWord()
    try:
        return FreeWord(_CODE[ch] for ch in text)
    except KeyError as exc:
        raise ValueError(f"invalid letter {exc.args[0]!r} in word {text!r}") from None


F2_IDENTITY = FreeWord()
F2_GENERATORS = tuple(FreeWord((c,), _reduced=True) for c in range(4))


# ---------------------------------------------------------------------------
# Exact arithmetic in the ring of integers with a prime p inverted
# ---------------------------------------------------------------------------


class PAdicLaurent:
    """Exact value u * p^(-k) with integer mantissa u and k >= 0.

    Normalization: u == 0 forces k == 0, and a nonzero u is not divisible
    by p unless k == 0.  Arithmetic is exact; there is no floating point.
    """

    __slots__ = ("mantissa", "expo", "prime")

    def __init__(self, mantissa: int, expo: int = 0, prime: int = 2):
        if expo < 0:
            raise ValueError("expo must be non-negative")
        if prime < 2:
            raise ValueError("prime must be >= 2")
        u, k = int(mantissa), int(expo)
        if u == 0:
            k = 0
        else:
            while k > 0 and u % prime == 0:
                u //= prime
                k -= 1
        object.__setattr__(self, "mantissa", u)
        object.__setattr__(self, "expo", k)
        object.__setattr__(self, "prime", prime)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PAdicLaurent is immutable")

    def _coerce(self, other) -> "PAdicLaurent":
        if isinstance(other, PAdicLaurent):
            if other.prime != self.prime:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, int):
            return PAdicLaurent(other, 0, self.prime)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.prime
        k = max(self.expo, other.expo)
        u = self.mantissa * p ** (k - self.expo) + other.mantissa * p ** (k - other.expo)
        return PAdicLaurent(u, k, p)

    __radd__ = __add__

    def __neg__(self):
        return PAdicLaurent(-self.mantissa, self.expo, self.prime)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PAdicLaurent(self.mantissa * other.mantissa, self.expo + other.expo, self.prime)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = PAdicLaurent(other, 0, self.prime)
        if not isinstance(other, PAdicLaurent):
            return NotImplemented
        return (
            self.prime == other.prime
            and self.mantissa == other.mantissa
            and self.expo == other.expo
        )

    def __hash__(self) -> int:
        return hash((self.mantissa, self.expo, self.prime))

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def is_integer(self) -> bool:
        return self.expo == 0

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, self.prime**self.expo)

    def reduce_mod(self, m: int) -> int:
        """Image in Z/m, sending p^-1 to the modular inverse of p.

        Requires gcd(m, p) == 1.
        """
        if math.gcd(m, self.prime) != 1:
            raise ValueError(f"modulus {m} not coprime to prime {self.prime}")
        return (self.mantissa * pow(self.prime, -self.expo, m)) % m

    def __repr__(self) -> str:
        if self.expo == 0:
            return f"{self.mantissa}"
        return f"{self.mantissa}/{self.prime}^{self.expo}"


def _as_padic(value, prime: int) -> PAdicLaurent:
    if isinstance(value, PAdicLaurent):
        if value.prime != prime:
            raise ValueError("mixed primes")
        return value
    if isinstance(value, int):
        return PAdicLaurent(value, 0, prime)
    if isinstance(value, tuple) and len(value) == 2:
        return PAdicLaurent(value[0], value[1], prime)
    raise TypeError(f"cannot interpret {value!r} as a p-adic Laurent value")


def _p_power(k: int, prime: int) -> PAdicLaurent:
    """p^k as an exact ring element, for any integer k."""
    if k >= 0:
        return PAdicLaurent(prime**k, 0, prime)
    return PAdicLaurent(1, -k, prime)


# ---------------------------------------------------------------------------
# Abels' group: 4x4 upper-triangular matrices, diagonal (1, p^k, p^n, 1)
# ---------------------------------------------------------------------------


class AbelsElement:
    """Group element with diagonal exponents (k, n) and six upper entries.

    The product is implemented by the explicit coordinate formulas of 4x4
    matrix multiplication (the generic matrix product over the exact ring
    serves as the test oracle).
    """

    __slots__ = ("prime", "k_exp", "n_exp", "x12", "x13", "x14", "x23", "x24", "x34")

    def __init__(self, prime: int = 2, k_exp: int = 0, n_exp: int = 0,
                 x12=0, x13=0, x14=0, x23=0, x24=0, x34=0):
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "k_exp", int(k_exp))
        object.__setattr__(self, "n_exp", int(n_exp))
        for name, value in (("x12", x12), ("x13", x13), ("x14", x14),
                            ("x23", x23), ("x24", x24), ("x34", x34)):
            object.__setattr__(self, name, _as_padic(value, prime))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("AbelsElement is immutable")

    def __mul__(self, other: "AbelsElement") -> "AbelsElement":
        if not isinstance(other, AbelsElement) or other.prime != self.prime:
            return NotImplemented
        p = self.prime
        pk_o = _p_power(other.k_exp, p)
        pn_o = _p_power(other.n_exp, p)
        pk_s = _p_power(self.k_exp, p)
        pn_s = _p_power(self.n_exp, p)
        return AbelsElement(
            p,
            self.k_exp + other.k_exp,
            self.n_exp + other.n_exp,
            x12=other.x12 + self.x12 * pk_o,
            x13=other.x13 + self.x12 * other.x23 + self.x13 * pn_o,
            x14=other.x14 + self.x12 * other.x24 + self.x13 * other.x34 + self.x14,
            x23=pk_s * other.x23 + self.x23 * pn_o,
            x24=pk_s * other.x24 + self.x23 * other.x34 + self.x24,
            x34=pn_s * other.x34 + self.x34,
        )

    def inverse(self) -> "AbelsElement":
        p = self.prime
        pk_inv = _p_power(-self.k_exp, p)
        pn_inv = _p_power(-self.n_exp, p)
        b34 = -(self.x34 * pn_inv)
        b23 = -(pk_inv * self.x23 * pn_inv)
        b24 = -(pk_inv * (self.x23 * b34 + self.x24))
        b12 = -(self.x12 * pk_inv)
        b13 = -(self.x12 * b23) - self.x13 * pn_inv
        b14 = -(self.x12 * b24 + self.x13 * b34 + self.x14)
        return AbelsElement(p, -self.k_exp, -self.n_exp,
                            x12=b12, x13=b13, x14=b14, x23=b23, x24=b24, x34=b34)

    def _key(self):
        return (self.prime, self.k_exp, self.n_exp,
                self.x12, self.x13, self.x14, self.x23, self.x24, self.x34)

    def __eq__(self, other) -> bool:
        return isinstance(other, AbelsElement) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    @property
    def is_identity(self) -> bool:
        return self == AbelsElement(self.prime)

    def sort_key(self):
        return tuple(
            v if isinstance(v, int) else (v.mantissa, v.expo) for v in self._key()[1:]
        )

    def to_matrix(self) -> list[list[PAdicLaurent]]:
        """Row-major 4x4 matrix over the exact ring."""
        p = self.prime
        one = PAdicLaurent(1, 0, p)
        zero = PAdicLaurent(0, 0, p)
        return [
            [one, self.x12, self.x13, self.x14],
            [zero, _p_power(self.k_exp, p), self.x23, self.x24],
            [zero, zero, _p_power(self.n_exp, p), self.x34],
            [zero, zero, zero, one],
        ]

    def __repr__(self) -> str:
        return (f"AbelsElement(p={self.prime}, k={self.k_exp}, n={self.n_exp}, "
                f"x12={self.x12}, x13={self.x13}, x14={self.x14}, "
                f"x23={self.x23}, x24={self.x24}, x34={self.x34})")


# ---------------------------------------------------------------------------
# Integer Heisenberg group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeisenbergElement:
    """Triple (a, b, c) with product (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')."""

    a: int = 0
    b: int = 0
    c: int = 0

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return HeisenbergElement(self.a + other.a, self.b + other.b,
                                 self.c + other.c + self.a * other.b)

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(-self.a, -self.b, -self.c + self.a * self.b)

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0

    def sort_key(self):
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class CenterMembership:
    in_center: bool
    in_n: bool


def center_membership(g) -> CenterMembership:
    """Decide membership in the center and in the distinguished subgroup N.

    For an Abels element the center consists of matrices whose only nonzero
    upper entry is x14 (with trivial diagonal); N additionally requires x14
    to be an integer.  For a Heisenberg element the center is {(0,0,c)} and
    the c-coordinate is already integral.
    """
    if isinstance(g, AbelsElement):
        central = (
            g.k_exp == 0 and g.n_exp == 0
            and g.x12.is_zero and g.x13.is_zero
            and g.x23.is_zero and g.x24.is_zero and g.x34.is_zero
        )
        return CenterMembership(central, central and g.x14.is_integer)
    if isinstance(g, HeisenbergElement):
        central = g.a == 0 and g.b == 0
        return CenterMembership(central, central)
    raise TypeError(f"no center test for {type(g).__name__}")


# ---------------------------------------------------------------------------
# Finite groups as multiplication tables
# ---------------------------------------------------------------------------


@dataclass
class GroupAxiomReport:
    order: int
    latin_violations: list[str] = field(default_factory=list)
    assoc_violations: list[str] = field(default_factory=list)
    identity_ok: bool = True
    inverse_violations: list[str] = field(default_factory=list)
    assoc_exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return (self.identity_ok and not self.latin_violations
                and not self.assoc_violations and not self.inverse_violations)

    def violations(self) -> list[str]:
        out = list(self.latin_violations) + list(self.assoc_violations) + list(self.inverse_violations)
        if not self.identity_ok:
            out.append("no two-sided identity element")
        return out


class FiniteGroup:
    """A finite group stored as a dense multiplication table.

    ``table[i, j]`` is the index of the product of elements i and j.  Dense
    tables are intended for orders up to a few thousand; larger quotients in
    the witness pipelines are handled as matrix groups with on-the-fly
    multiplication.
    """

    def __init__(self, table: np.ndarray, labels: Sequence[str] | None = None):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("table must be square")
        self.order = int(table.shape[0])
        self.table = table
        self.labels = list(labels) if labels is not None else [str(i) for i in range(self.order)]
        self.identity = self._find_identity()
        self.inverse = self._find_inverses()

    def _find_identity(self) -> int:
        rng = np.arange(self.order)
        for e in range(self.order):
            if np.array_equal(self.table[e], rng) and np.array_equal(self.table[:, e], rng):
                return e
        raise ValueError("table has no two-sided identity")

    def _find_inverses(self) -> np.ndarray:
        inv = np.full(self.order, -1, dtype=np.int64)
        for i in range(self.order):
            hits = np.nonzero(self.table[i] == self.identity)[0]
            if len(hits) != 1 or self.table[hits[0], i] != self.identity:
                raise ValueError(f"element {i} has no two-sided inverse")
            inv[i] = hits[0]
        return inv

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self.inverse[i])

    def element_order(self, i: int) -> int:
        n, g = 1, i
        while g != self.identity:
            g = self.mul(g, i)
            n += 1
        return n

    def is_subgroup(self, subset: Sequence[int]) -> bool:
        s = set(int(i) for i in subset)
        if self.identity not in s:
            return False
        return all(self.mul(i, j) in s and self.inv(i) in s for i in s for j in s)

    def is_central(self, subset: Sequence[int]) -> bool:
        return all(self.mul(h, g) == self.mul(g, h) for h in subset for g in range(self.order))


ASSOC_EXHAUSTIVE_MAX = 256
ASSOC_RANDOM_TRIALS = 10_000


def verify_group_axioms(group: FiniteGroup | np.ndarray, *, seed: int = 0) -> GroupAxiomReport:
    """Check Latin-square, associativity, identity and inverse axioms.

    Associativity is exhaustive for orders <= 256 and randomized (10^4
    seeded triples) above that.
    """
    table = group.table if isinstance(group, FiniteGroup) else np.asarray(group, dtype=np.int64)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise ValueError("table dimensions inconsistent")
    n = table.shape[0]
    report = GroupAxiomReport(order=n)
    rng_row = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(table[i]), rng_row):
            report.latin_violations.append(f"row {i} is not a permutation")
        if not np.array_equal(np.sort(table[:, i]), rng_row):
            report.latin_violations.append(f"column {i} is not a permutation")
    identity = None
    for e in range(n):
        if np.array_equal(table[e], rng_row) and np.array_equal(table[:, e], rng_row):
            identity = e
            break
    report.identity_ok = identity is not None
    if report.latin_violations or not report.identity_ok:
        return report
    if n <= ASSOC_EXHAUSTIVE_MAX:
        for a in range(n):
            left = table[table[a], :]          # left[b, c] = (a*b)*c
            right = table[a][table]            # right[b, c] = a*(b*c)
            bad = np.argwhere(left != right)
            for b, c in bad[:5]:
                report.assoc_violations.append(f"({a}*{b})*{c} != {a}*({b}*{c})")
            if len(bad):
                break
    else:
        report.assoc_exhaustive = False
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, n, size=(ASSOC_RANDOM_TRIALS, 3))
        for a, b, c in triples:
            if table[table[a, b], c] != table[a, table[b, c]]:
                report.assoc_violations.append(f"({a}*{b})*{c} != {a}*({b}*{c})")
                break
    for i in range(n):
        hits = np.nonzero(table[i] == identity)[0]
        if len(hits) != 1 or table[hits[0], i] != identity:
            report.inverse_violations.append(f"element {i} lacks a two-sided inverse")
    return report


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("order must be positive")
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    return FiniteGroup(table, labels=[str(i) for i in range(n)])


def mulclose(generators: Sequence, mul: Callable, identity, *, cap: int = 200_000) -> list:
    """Closure of a generating set under multiplication, BFS order."""
    elements = [identity]
    index = {identity: 0}
    frontier = [identity]
    while frontier:
        new: list = []
        for x in frontier:
            for g in generators:
                y = mul(x, g)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    new.append(y)
                    if len(elements) > cap:
                        raise ValueError(f"group closure exceeded cap {cap}")
        frontier = new
    return elements


def group_from_elements(elements: Sequence, mul: Callable,
                        labels: Sequence[str] | None = None) -> FiniteGroup:
    """Tabulate a finite group given its full element list and product map."""
    index = {x: i for i, x in enumerate(elements)}
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            table[i, j] = index[mul(x, y)]
    return FiniteGroup(table, labels=labels)


def heisenberg_mod(m: int) -> tuple[FiniteGroup, list[tuple[int, int, int]], list[int]]:
    """Heisenberg group over Z/m by enumeration.

    Returns (group, element triples, indices of the center {(0,0,c)}).
    """
    triples = [(a, b, c) for a in range(m) for b in range(m) for c in range(m)]

    def mul(x, y):
        return ((x[0] + y[0]) % m, (x[1] + y[1]) % m, (x[2] + y[2] + x[0] * y[1]) % m)

    group = group_from_elements(triples, mul, labels=[str(t) for t in triples])
    center = [i for i, (a, b, _) in enumerate(triples) if a == 0 and b == 0]
    return group, triples, center


# ---------------------------------------------------------------------------
# Congruence quotients of Abels' group
# ---------------------------------------------------------------------------


def multiplicative_order(a: int, m: int) -> int:
    if math.gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    order, x = 1, a % m
    while x != 1:
        x = (x * a) % m
        order += 1
    return order


class CongruenceQuotient:
    """Reduction of Abels' group modulo m, with p inverted via the modular inverse."""

    def __init__(self, modulus: int, prime: int = 2):
        if modulus < 2:
            raise ValueError("modulus must be >= 2")
        if math.gcd(modulus, prime) != 1:
            raise ValueError(f"modulus {modulus} not coprime to prime {prime}")
        self.modulus = modulus
        self.prime = prime

    def reduce(self, g: AbelsElement) -> np.ndarray:
        """Image of g as a 4x4 integer matrix mod m."""
        if g.prime != self.prime:
            raise ValueError("element prime does not match quotient prime")
        m, p = self.modulus, self.prime
        out = np.zeros((4, 4), dtype=np.int64)
        out[0, 0] = out[3, 3] = 1
        out[1, 1] = pow(p, g.k_exp, m)
        out[2, 2] = pow(p, g.n_exp, m)
        out[0, 1] = g.x12.reduce_mod(m)
        out[0, 2] = g.x13.reduce_mod(m)
        out[0, 3] = g.x14.reduce_mod(m)
        out[1, 2] = g.x23.reduce_mod(m)
        out[1, 3] = g.x24.reduce_mod(m)
        out[2, 3] = g.x34.reduce_mod(m)
        return out

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a @ b) % self.modulus


# ---------------------------------------------------------------------------
# Line-oriented element serialization
# ---------------------------------------------------------------------------
#
# Free words serialize as strings over {a, A, b, B} ("e" for the identity).
# Matrix elements serialize row-major with a (mantissa, expo) integer pair
# per entry: 32 integers for a 4x4 Abels element, 18 for a 3x3 Heisenberg
# element.  '#' starts a comment line.


def element_to_line(g) -> str:
    if isinstance(g, FreeWord):
        return str(g)
    if isinstance(g, AbelsElement):
        parts: list[str] = []
        for row in g.to_matrix():
            for entry in row:
                parts.extend((str(entry.mantissa), str(entry.expo)))
        return " ".join(parts)
    if isinstance(g, HeisenbergElement):
        mat = [[1, g.a, g.c], [0, 1, g.b], [0, 0, 1]]
        parts = []
        for row in mat:
            for entry in row:
                parts.extend((str(entry), "0"))
        return " ".join(parts)
    raise TypeError(f"cannot serialize {type(g).__name__}")


def _parse_abels_line(tokens: list[str], prime: int) -> AbelsElement:
    if len(tokens) != 32:
        raise ValueError(f"expected 32 integers for a 4x4 element, got {len(tokens)}")
    vals = [PAdicLaurent(int(tokens[2 * i]), int(tokens[2 * i + 1]), prime) for i in range(16)]
    mat = [vals[4 * r: 4 * r + 4] for r in range(4)]
    for r in range(4):
        for c in range(4):
            if c < r and not mat[r][c].is_zero:
                raise ValueError("entries below the diagonal must vanish")
    if mat[0][0] != 1 or mat[3][3] != 1:
        raise ValueError("corner diagonal entries must be 1")

    def diag_exponent(v: PAdicLaurent) -> int:
        if v.expo > 0:
            if v.mantissa != 1:
                raise ValueError("diagonal entries must be powers of the prime")
            return -v.expo
        u, k = v.mantissa, 0
        if u <= 0:
            raise ValueError("diagonal entries must be positive powers of the prime")
        while u % prime == 0:
            u //= prime
            k += 1
        if u != 1:
            raise ValueError("diagonal entries must be powers of the prime")
        return k

    return AbelsElement(prime, diag_exponent(mat[1][1]), diag_exponent(mat[2][2]),
                        x12=mat[0][1], x13=mat[0][2], x14=mat[0][3],
                        x23=mat[1][2], x24=mat[1][3], x34=mat[2][3])


def _parse_heisenberg_line(tokens: list[str]) -> HeisenbergElement:
    if len(tokens) != 18:
        raise ValueError(f"expected 18 integers for a 3x3 element, got {len(tokens)}")
    vals = [int(tokens[2 * i]) for i in range(9)]
    expos = [int(tokens[2 * i + 1]) for i in range(9)]
    if any(expos):
        raise ValueError("Heisenberg entries are integers; all expos must be 0")
    mat = [vals[0:3], vals[3:6], vals[6:9]]
    if mat[0][0] != 1 or mat[1][1] != 1 or mat[2][2] != 1 or mat[1][0] or mat[2][0] or mat[2][1]:
        raise ValueError("not an upper unitriangular 3x3 matrix")
    return HeisenbergElement(a=mat[0][1], b=mat[1][2], c=mat[0][2])


def parse_element_lines(lines: Iterable[str], kind: str, *, prime: int = 2) -> list:
    """Parse a line-oriented element file.

    ``kind`` is one of ``free2``, ``abels``, ``heisenberg``.  Blank lines and
    '#' comments are skipped.
    """
    out = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind == "free2":
            out.append(free_word(line))
        elif kind == "abels":
            out.append(_parse_abels_line(line.split(), prime))
        elif kind == "heisenberg":
            out.append(_parse_heisenberg_line(line.split()))
        else:
            raise ValueError(f"unknown element kind {kind!r}")
    return out

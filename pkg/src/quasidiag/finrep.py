"""Finite-dimensional unitary representations of finite groups.

Representations are carried by monomial matrices: a permutation together
with unit phases stored as exact rational rotation numbers (numerator array
over a common denominator).  Spectra, and hence distances to the identity,
come from the permutation cycle structure: on a cycle of length L with
phase product of rotation q, the eigenvalues are the L-th roots of
exp(2 pi i q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .groups import FiniteGroup

__all__ = [
    "MonomialMatrix",
    "monomial_identity",
    "monomial_norm_minus_identity",
    "UnitaryRep",
    "CentralCharacter",
    "cyclic_character",
    "regular_rep",
    "induce_central",
    "SeparationResult",
    "check_induced_separation",
    "check_induced_restriction",
    "direct_sum",
    "greedy_transversal",
]


class MonomialMatrix:
    """Permutation-with-phases matrix: column j carries phase_j at row perm[j].

    Phases are exp(2 pi i * rot_num[j] / rot_den); products and adjoints stay
    exact because rotations add.
    """

    __slots__ = ("perm", "rot_num", "rot_den")

    def __init__(self, perm: np.ndarray, rot_num: np.ndarray | None = None,
                 rot_den: int = 1):
        perm = np.asarray(perm, dtype=np.int64)
        if rot_num is None:
            rot_num = np.zeros(len(perm), dtype=np.int64)
        rot_num = np.asarray(rot_num, dtype=np.int64)
        if rot_den < 1:
            raise ValueError("rotation denominator must be >= 1")
        if len(rot_num) != len(perm):
            raise ValueError("phase array length mismatch")
        self.perm = perm
        self.rot_num = rot_num % rot_den
        self.rot_den = int(rot_den)

    @property
    def dim(self) -> int:
        return len(self.perm)

    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        den = lcm(self.rot_den, other.rot_den)
        num = (self.rot_num[other.perm] * (den // self.rot_den)
               + other.rot_num * (den // other.rot_den))
        return MonomialMatrix(self.perm[other.perm], num, den)

    def adjoint(self) -> "MonomialMatrix":
        inv_perm = np.empty_like(self.perm)
        inv_perm[self.perm] = np.arange(self.dim, dtype=np.int64)
        num = -self.rot_num[inv_perm]
        return MonomialMatrix(inv_perm, num, self.rot_den)

    def _normalized(self) -> tuple:
        rots = tuple(Fraction(int(n), self.rot_den) % 1 for n in self.rot_num)
        return (tuple(self.perm.tolist()), rots)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonomialMatrix):
            return NotImplemented
        return self._normalized() == other._normalized()

    def __hash__(self) -> int:
        return hash(self._normalized())

    @property
    def is_identity(self) -> bool:
        return (np.array_equal(self.perm, np.arange(self.dim))
                and not np.any(self.rot_num % self.rot_den))

    def is_scalar(self) -> Fraction | None:
        """Rotation of the scalar if the matrix is a phase times the identity."""
        if not np.array_equal(self.perm, np.arange(self.dim)):
            return None
        first = self.rot_num[0] % self.rot_den
        if np.any(self.rot_num % self.rot_den != first):
            return None
        return Fraction(int(first), self.rot_den)

    def phase_values(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.rot_num / self.rot_den)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[self.perm, np.arange(self.dim)] = self.phase_values()
        return out

    def cycles(self):
        """Yield (length, rotation numerator sum mod den) per permutation cycle."""
        visited = np.zeros(self.dim, dtype=bool)
        for start in range(self.dim):
            if visited[start]:
                continue
            length = 0
            total = 0
            j = start
            while not visited[j]:
                visited[j] = True
                total += int(self.rot_num[j])
                j = int(self.perm[j])
                length += 1
            yield length, total % self.rot_den


def lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def monomial_identity(dim: int) -> MonomialMatrix:
    return MonomialMatrix(np.arange(dim, dtype=np.int64))


def _max_eigen_distance(length: int, phase_num: int, den: int) -> float:
    """max |mu - 1| over the L-th roots of a phase with rotation phase_num/den.

    The eigenvalue rotations are (phase_num/den + j) / L; the distance to 1
    is 2 |sin(pi theta)|, maximized by the rotation closest to 1/2.  The
    argmax is found by exact integer comparison.
    """
    # rotations are (phase_num + j*den) / (L*den) for j = 0..L-1
    big_den = length * den
    target = big_den  # 1/2, scaled to the common numerator grid
    best_num = None
    best_dist = None
    # j making 2*(phase_num + j*den) closest to big_den
    j_star = round((big_den - 2 * phase_num) / (2 * den))
    for j in (j_star - 1, j_star, j_star + 1):
        num = (phase_num + j * den) % big_den
        dist = abs(2 * num - target)
        if best_dist is None or dist < best_dist:
            best_dist = dist
            best_num = num
    theta = best_num / big_den
    return 2.0 * abs(math.sin(math.pi * theta))


def monomial_norm_minus_identity(m: MonomialMatrix) -> float:
    """Exact ||M - 1|| via per-cycle eigenvalues."""
    best = 0.0
    for length, phase in m.cycles():
        best = max(best, _max_eigen_distance(length, phase, m.rot_den))
    return best


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


@dataclass
class UnitaryRep:
    """A unitary representation given by an evaluation map into monomials.

    ``evaluate`` accepts whatever element keys the source uses (indices for
    table groups, group elements for matrix quotients).
    """

    source: Any
    dim: int
    evaluate: Callable[[Any], MonomialMatrix]
    label: str = ""

    def norm_minus_identity(self, g) -> float:
        return monomial_norm_minus_identity(self.evaluate(g))

    def distance(self, g, h) -> float:
        """||rho(g) - rho(h)|| computed exactly through unitary invariance."""
        diff = self.evaluate(h).adjoint() @ self.evaluate(g)
        return monomial_norm_minus_identity(diff)


HOMOMORPHISM_EXHAUSTIVE_MAX = 512
HOMOMORPHISM_RANDOM_PAIRS = 10_000


def _certify_homomorphism(group: FiniteGroup, evaluate, *, seed: int = 0):
    n = group.order
    if n <= HOMOMORPHISM_EXHAUSTIVE_MAX:
        pairs = ((i, j) for i in range(n) for j in range(n))
    else:
        rng = np.random.default_rng(seed)
        pairs = (tuple(p) for p in rng.integers(0, n, size=(HOMOMORPHISM_RANDOM_PAIRS, 2)))
    for i, j in pairs:
        if evaluate(i) @ evaluate(j) != evaluate(group.mul(i, j)):
            raise ValueError(f"not a homomorphism at pair ({i}, {j})")


def regular_rep(group: FiniteGroup) -> UnitaryRep:
    """Left regular representation as permutation matrices."""
    cache: dict[int, MonomialMatrix] = {}

    def evaluate(i: int) -> MonomialMatrix:
        if i not in cache:
            cache[i] = MonomialMatrix(group.table[i].copy())
        return cache[i]

    return UnitaryRep(source=group, dim=group.order, evaluate=evaluate,
                      label="regular")


# ---------------------------------------------------------------------------
# Characters of central subgroups and induction
# ---------------------------------------------------------------------------


class CentralCharacter:
    """A character of a central subgroup, stored as exact rotation numbers."""

    def __init__(self, group: FiniteGroup, subgroup: Sequence[int],
                 rotations: dict[int, Fraction]):
        subgroup = sorted(int(i) for i in subgroup)
        if not group.is_subgroup(subgroup):
            raise ValueError("H is not a subgroup")
        if not group.is_central(subgroup):
            raise ValueError("H is not central")
        if set(rotations) != set(subgroup):
            raise ValueError("rotation table must cover exactly H")
        for h1 in subgroup:
            for h2 in subgroup:
                left = (rotations[h1] + rotations[h2]) % 1
                if left != rotations[group.mul(h1, h2)] % 1:
                    raise ValueError("character is not multiplicative")
        self.group = group
        self.subgroup = subgroup
        self.rotations = {h: r % 1 for h, r in rotations.items()}
        self.order = 1
        for r in self.rotations.values():
            self.order = lcm(self.order, r.denominator)

    def rotation(self, h: int) -> Fraction:
        return self.rotations[h]

    @property
    def is_trivial(self) -> bool:
        return all(r == 0 for r in self.rotations.values())


def cyclic_character(group: FiniteGroup, subgroup: Sequence[int], k: int) -> CentralCharacter:
    """Character h -> exp(2 pi i k j / L) on a cyclic central subgroup of order L,
    where h is the j-th power of a chosen generator."""
    subgroup = sorted(int(i) for i in subgroup)
    order = len(subgroup)
    generator = None
    for h in subgroup:
        if h != group.identity and group.element_order(h) == order:
            generator = h
            break
    if generator is None:
        if order == 1:
            generator = group.identity
        else:
            raise ValueError("subgroup is not cyclic")
    rotations: dict[int, Fraction] = {}
    g = group.identity
    for j in range(order):
        rotations[g] = Fraction(k * j, order) % 1
        g = group.mul(g, generator)
    if set(rotations) != set(subgroup):
        raise ValueError("generator does not span the subgroup")
    return CentralCharacter(group, subgroup, rotations)


def greedy_transversal(group: FiniteGroup, subgroup: Sequence[int]) -> list[int]:
    """Deterministic coset transversal: scan elements in index order."""
    seen: set[int] = set()
    reps: list[int] = []
    for g in range(group.order):
        if g in seen:
            continue
        reps.append(g)
        for h in subgroup:
            seen.add(group.mul(g, h))
    return reps


def induce_central(group: FiniteGroup, character: CentralCharacter,
                   coset_reps: Sequence[int] | None = None,
                   *, certify: bool = True) -> UnitaryRep:
    """Induce a character of a central subgroup up to the whole group.

    The basis is indexed by cosets; a group element g sends the basis vector
    at the coset of x to the one at the coset of g*x with phase gamma(h),
    where g*x = x'*h against the transversal.  The homomorphism property is
    certified exhaustively for orders up to 512.
    """
    subgroup = character.subgroup
    if coset_reps is None:
        coset_reps = greedy_transversal(group, subgroup)
    coset_reps = list(coset_reps)
    n_cosets = group.order // len(subgroup)
    if len(coset_reps) != n_cosets:
        raise ValueError(f"transversal must have {n_cosets} representatives")
    coset_of: dict[int, tuple[int, int]] = {}
    for idx, rep in enumerate(coset_reps):
        for h in subgroup:
            g = group.mul(rep, h)
            if g in coset_of:
                raise ValueError("representatives are not in distinct cosets")
            coset_of[g] = (idx, h)
    if len(coset_of) != group.order:
        raise ValueError("transversal does not cover the group")

    den = character.order
    cache: dict[int, MonomialMatrix] = {}

    def evaluate(g: int) -> MonomialMatrix:
        if g not in cache:
            perm = np.empty(n_cosets, dtype=np.int64)
            num = np.empty(n_cosets, dtype=np.int64)
            for idx, rep in enumerate(coset_reps):
                target, h = coset_of[group.mul(g, rep)]
                rot = character.rotation(h)
                perm[idx] = target
                num[idx] = rot.numerator * (den // rot.denominator)
            cache[g] = MonomialMatrix(perm, num, den)
        return cache[g]

    rep = UnitaryRep(source=group, dim=n_cosets, evaluate=evaluate, label="induced")
    if certify:
        _certify_homomorphism(group, evaluate)
    return rep


@dataclass(frozen=True)
class SeparationResult:
    min_norm: float
    ok: bool
    worst_element: int


SEPARATION_TOL = 1e-12
SQRT2 = math.sqrt(2.0)


def check_induced_separation(rep: UnitaryRep, subgroup: Sequence[int]) -> SeparationResult:
    """Minimum of ||rho(g) - 1|| over g outside the inducing subgroup."""
    group: FiniteGroup = rep.source
    subgroup_set = set(int(i) for i in subgroup)
    min_norm = math.inf
    worst = -1
    for g in range(group.order):
        if g in subgroup_set:
            continue
        value = rep.norm_minus_identity(g)
        if value < min_norm:
            min_norm = value
            worst = g
    return SeparationResult(min_norm=min_norm, ok=min_norm >= SQRT2 - SEPARATION_TOL,
                            worst_element=worst)


def check_induced_restriction(rep: UnitaryRep, character: CentralCharacter) -> bool:
    """Each subgroup element must act as its character value times the identity."""
    for h in character.subgroup:
        scalar = rep.evaluate(h).is_scalar()
        if scalar is None or scalar != character.rotation(h) % 1:
            return False
    return True


def direct_sum(reps: Sequence[UnitaryRep]) -> UnitaryRep:
    """Block-diagonal sum; the distance to the identity is the max over blocks."""
    if not reps:
        raise ValueError("empty direct sum")
    source = reps[0].source
    for r in reps[1:]:
        if r.source is not source:
            raise ValueError("direct sum requires a common source group")
    dims = [r.dim for r in reps]
    total = sum(dims)
    offsets = np.cumsum([0] + dims[:-1])

    def evaluate(g) -> MonomialMatrix:
        blocks = [r.evaluate(g) for r in reps]
        den = 1
        for b in blocks:
            den = lcm(den, b.rot_den)
        perm = np.empty(total, dtype=np.int64)
        num = np.empty(total, dtype=np.int64)
        for b, off in zip(blocks, offsets):
            perm[off:off + b.dim] = b.perm + off
            num[off:off + b.dim] = b.rot_num * (den // b.rot_den)
        return MonomialMatrix(perm, num, den)

    return UnitaryRep(source=source, dim=total, evaluate=evaluate, label="direct-sum")

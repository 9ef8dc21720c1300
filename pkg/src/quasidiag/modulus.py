"""Quantitative lower and upper bounds for commutator norms on the rank-2
free group: radial sphere vectors and their pairings, the rank-one
commutator identity, paradoxical-decomposition certificates with the
1/(n+m-2) floor, the trace inequality behind it, and a radial upper-bound
search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cayley import BallIndex, f2_ball
from .groups import FreeWord, free_word
from .regrep import (FiniteProjection, SparseOperator, SupportError,
                     TruncatedRep, translator_commutator_norm)

__all__ = [
    "SphereVector",
    "sphere_vector",
    "pairing_closed_form",
    "pairing_numeric",
    "commutator_closed_form",
    "rank_one_commutator_norm",
    "projection_from_vector",
    "Piece",
    "ParadoxicalCertificate",
    "f2_standard_certificate",
    "f2_five_piece_certificate",
    "VerificationReport",
    "verify_certificate",
    "CfBound",
    "cf_lower_bound",
    "TraceLemmaResult",
    "trace_lemma_check",
    "TraceLemmaTrials",
    "random_trace_lemma_trials",
    "AuditRecord",
    "audit_lower_bound",
    "AuditTrials",
    "random_audit_trials",
    "UpperSearchResult",
    "cf_upper_search",
    "radial_profile_pairing",
]


# ---------------------------------------------------------------------------
# Sphere vectors and pairings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereVector:
    """Unit vector with coefficient (|S_i| * n)^(-1/2) on each sphere i <= n."""

    n: int
    coefficients: tuple[float, ...]
    vector: np.ndarray
    ball: BallIndex


def sphere_vector(n: int, ball_index: BallIndex) -> SphereVector:
    if n < 1:
        raise ValueError("depth n must be >= 1")
    if ball_index.radius < n:
        raise ValueError(f"ball radius {ball_index.radius} too small for depth {n}")
    coeffs = []
    vec = np.zeros(len(ball_index))
    for i in range(1, n + 1):
        size = ball_index.sphere_sizes[i]
        alpha = 1.0 / math.sqrt(size * n)
        coeffs.append(alpha)
        vec[ball_index.offsets[i]:ball_index.offsets[i + 1]] = alpha
    return SphereVector(n=n, coefficients=tuple(coeffs), vector=vec, ball=ball_index)


def pairing_closed_form(n: int) -> float:
    """Pairing of the depth-n sphere vector with its translate by a generator.

    Evaluates the sum over spheres with the convention that the coefficients
    at depth 0 and n+1 vanish; the counts are |S_{i-1} \\ S^a_{i-1}| = 3^(i-1)
    and |S^a_{i+1}| = 3^i.  The total telescopes to (sqrt(3)/2)(1 - 1/n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")

    def alpha(i: int) -> float:
        if i < 1 or i > n:
            return 0.0
        return 1.0 / math.sqrt(4 * 3 ** (i - 1) * n)

    total = 0.0
    for i in range(1, n + 1):
        back_count = 3 ** (i - 1) if i >= 2 else 1
        total += alpha(i) * alpha(i - 1) * back_count
        total += alpha(i) * alpha(i + 1) * 3**i
    return total


def pairing_numeric(generator: str, n: int, rep: TruncatedRep) -> float:
    """Pairing computed by a sparse matrix-vector product on the ball."""
    if rep.radius < n + 1:
        raise ValueError(f"representation radius {rep.radius} too small (needs >= {n + 1})")
    xi = sphere_vector(n, rep.ball)
    translated = rep.operator(generator).apply(xi.vector)
    return float(np.real(np.vdot(xi.vector, translated)))


def commutator_closed_form(n: int) -> float:
    """Commutator norm of a generator against the depth-n radial projection."""
    return math.sqrt(max(0.0, 1.0 - 0.75 * (1.0 - 1.0 / n) ** 2))


UNIT_TOL = 1e-12


def rank_one_commutator_norm(op: SparseOperator, vec: np.ndarray,
                             *, support_dim: int | None = None) -> float:
    """Exact rank-one identity: the norm is sqrt(1 - |<U xi, xi>|^2).

    Requires a unit vector; when ``support_dim`` is given the vector must
    vanish outside that prefix of the basis so the compressed operator acts
    unitarily on it.
    """
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"vector norm {norm} is not 1 within {UNIT_TOL}")
    if support_dim is not None and np.any(vec[support_dim:] != 0):
        raise SupportError("vector has weight outside the declared support")
    image = op.apply(vec)
    image_norm = float(np.linalg.norm(image))
    if abs(image_norm - 1.0) > 1e-10:
        raise ValueError(
            f"operator is not unitary on the vector (image norm {image_norm}); "
            "check the support condition")
    pairing = abs(np.vdot(vec, image))
    return math.sqrt(max(0.0, 1.0 - pairing * pairing))


def projection_from_vector(ball_index: BallIndex, vec: np.ndarray,
                           support_radius: int) -> FiniteProjection:
    """Rank-one projection onto a unit vector supported in a sub-ball."""
    return FiniteProjection(ball_index, np.asarray(vec).reshape(-1, 1), support_radius)


# ---------------------------------------------------------------------------
# Paradoxical certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    name: str
    translator: FreeWord
    member: Callable[[FreeWord], bool]


@dataclass
class ParadoxicalCertificate:
    """Pieces and translators witnessing the three simultaneous decompositions.

    The first translator on each side is the identity.  Membership predicates
    are total on reduced words, so verification on any ball is exact.
    """

    x_pieces: list[Piece]
    y_pieces: list[Piece]
    verified_radius: int | None = None

    def __post_init__(self):
        if not self.x_pieces[0].translator.is_identity:
            raise ValueError("first X translator must be the identity")
        if not self.y_pieces[0].translator.is_identity:
            raise ValueError("first Y translator must be the identity")

    @property
    def n_pieces(self) -> int:
        return len(self.x_pieces) + len(self.y_pieces)

    def translators(self) -> list[FreeWord]:
        seen: list[FreeWord] = []
        for piece in self.x_pieces + self.y_pieces:
            if piece.translator not in seen:
                seen.append(piece.translator)
        return seen

    def in_x(self, w: FreeWord) -> bool:
        return any(p.member(w) for p in self.x_pieces)

    def in_y(self, w: FreeWord) -> bool:
        return any(p.member(w) for p in self.y_pieces)


def _is_negative_a_power(w: FreeWord) -> bool:
    return len(w) >= 1 and all(c == 2 for c in w.codes)


def f2_standard_certificate() -> ParadoxicalCertificate:
    """The four-piece decomposition of the rank-2 free group.

    X1 holds the words starting with a, the identity, and the negative powers
    of a; X2 the remaining words starting with a^-1; Y1 and Y2 the words
    starting with b and b^-1.  Translators: identity and a on the X side,
    identity and b on the Y side.
    """
    x1 = Piece("X1", free_word("e"),
               lambda w: w.is_identity or w.first_letter() == "a" or _is_negative_a_power(w))
    x2 = Piece("X2", free_word("a"),
               lambda w: w.first_letter() == "A" and not _is_negative_a_power(w))
    y1 = Piece("Y1", free_word("e"), lambda w: w.first_letter() == "b")
    y2 = Piece("Y2", free_word("b"), lambda w: w.first_letter() == "B")
    return ParadoxicalCertificate(x_pieces=[x1, x2], y_pieces=[y1, y2])


def f2_five_piece_certificate() -> ParadoxicalCertificate:
    """A five-piece variant: Y2 split by second letter, both parts translated by b."""
    base = f2_standard_certificate()

    def starts_bb(w: FreeWord) -> bool:
        return w.first_letter() == "B" and len(w) >= 2 and w.codes[1] == 3

    def starts_b_only(w: FreeWord) -> bool:
        return w.first_letter() == "B" and not starts_bb(w)

    y2a = Piece("Y2a", free_word("b"), starts_bb)
    y2b = Piece("Y2b", free_word("b"), starts_b_only)
    return ParadoxicalCertificate(x_pieces=list(base.x_pieces),
                                  y_pieces=[base.y_pieces[0], y2a, y2b])


@dataclass
class VerificationReport:
    radius: int
    checked: int
    violations: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_certificate(cert: ParadoxicalCertificate, radius: int,
                       *, max_violations: int = 20) -> VerificationReport:
    """Exhaustively check the three decompositions on the ball of the given radius.

    For every word w the checks are: w lies in exactly one piece; exactly one
    translated X piece contains it; and exactly one translated Y piece does.
    Violations are reported with the witness word.
    """
    ball_index = f2_ball(radius)
    report = VerificationReport(radius=radius, checked=len(ball_index))
    pieces = cert.x_pieces + cert.y_pieces
    inverses = {id(p): p.translator.inverse() for p in pieces}
    for w in ball_index.elements:
        hits = [p.name for p in pieces if p.member(w)]
        if len(hits) != 1:
            report.violations.append(("piece-partition", str(w), f"pieces {hits}"))
        x_hits = [p.name for p in cert.x_pieces if p.member(inverses[id(p)] * w)]
        if len(x_hits) != 1:
            report.violations.append(("x-decomposition", str(w), f"pieces {x_hits}"))
        y_hits = [p.name for p in cert.y_pieces if p.member(inverses[id(p)] * w)]
        if len(y_hits) != 1:
            report.violations.append(("y-decomposition", str(w), f"pieces {y_hits}"))
        if len(report.violations) >= max_violations:
            break
    if report.ok and (cert.verified_radius is None or radius > cert.verified_radius):
        cert.verified_radius = radius
    return report


@dataclass(frozen=True)
class CfBound:
    bound: Fraction
    pieces: int
    translators: tuple[str, ...]


DEFAULT_MIN_VERIFIED_RADIUS = 6


def cf_lower_bound(cert: ParadoxicalCertificate,
                   *, min_verified_radius: int = DEFAULT_MIN_VERIFIED_RADIUS) -> CfBound:
    """The floor 1/(n+m-2) attached to a verified certificate."""
    if cert.verified_radius is None or cert.verified_radius < min_verified_radius:
        raise ValueError(
            f"certificate must be verified on a ball of radius >= {min_verified_radius} "
            f"(have {cert.verified_radius})")
    n, m = len(cert.x_pieces), len(cert.y_pieces)
    return CfBound(bound=Fraction(1, n + m - 2), pieces=n + m,
                   translators=tuple(str(t) for t in cert.translators()))


# ---------------------------------------------------------------------------
# The trace inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceLemmaResult:
    lhs: float
    bound: float
    rank: int
    ok: bool


HERMITIAN_TOL = 1e-10
RANK_CUTOFF = 1e-9
TRACE_SLACK = 1e-9


def trace_lemma_check(x: np.ndarray, q: np.ndarray) -> TraceLemmaResult:
    """Check |Tr(QX)| <= rank(X) * ||X|| / 2 for traceless hermitian X, 0 <= Q <= 1."""
    x = np.asarray(x)
    q = np.asarray(q)
    if np.max(np.abs(x - x.conj().T)) > HERMITIAN_TOL:
        raise ValueError("X is not hermitian")
    if abs(np.trace(x)) > HERMITIAN_TOL:
        raise ValueError("X is not traceless")
    q_eigs = np.linalg.eigvalsh((q + q.conj().T) / 2.0)
    if q_eigs.min() < -HERMITIAN_TOL or q_eigs.max() > 1 + HERMITIAN_TOL:
        raise ValueError("Q does not satisfy 0 <= Q <= 1")
    singulars = np.linalg.svd(x, compute_uv=False)
    rank = int(np.sum(singulars > RANK_CUTOFF))
    norm = float(singulars[0]) if len(singulars) else 0.0
    lhs = abs(float(np.real(np.trace(q @ x))))
    bound = 0.5 * rank * norm
    return TraceLemmaResult(lhs=lhs, bound=bound, rank=rank, ok=lhs <= bound + TRACE_SLACK)


@dataclass(frozen=True)
class TraceLemmaTrials:
    trials: int
    seed: int
    violations: int
    max_ratio: float


def random_trace_lemma_trials(trials: int, *, max_dim: int = 40,
                              seed: int = 0) -> TraceLemmaTrials:
    """Seeded random instances: X traceless hermitian, Q = V diag(u) V* with u in [0,1]."""
    rng = np.random.default_rng(seed)
    violations = 0
    max_ratio = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, max_dim + 1))
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        herm = (g + g.conj().T) / 2.0
        x = herm - (np.trace(herm) / dim) * np.eye(dim)
        basis, _ = np.linalg.qr(rng.standard_normal((dim, dim))
                                + 1j * rng.standard_normal((dim, dim)))
        q = (basis * rng.uniform(0.0, 1.0, size=dim)) @ basis.conj().T
        result = trace_lemma_check(x, q)
        if not result.ok:
            violations += 1
        if result.bound > 0:
            max_ratio = max(max_ratio, result.lhs / result.bound)
    return TraceLemmaTrials(trials=trials, seed=seed, violations=violations,
                            max_ratio=max_ratio)


# ---------------------------------------------------------------------------
# The lower-bound audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditRecord:
    """Numerical audit of the trace-inequality chain for one projection."""

    rank: int
    epsilon: float
    trace_x: float
    trace_y: float
    slack_x: float
    slack_y: float
    partition_defect: float
    epsilon_floor: float
    floor_ok: bool
    inequalities_ok: bool


AUDIT_SLACK = 1e-8


def audit_lower_bound(projection: FiniteProjection, cert: ParadoxicalCertificate,
                      rep: TruncatedRep, *, tol: float = 1e-10) -> AuditRecord:
    """Audit the two trace inequalities and the resulting commutator floor.

    epsilon is the largest commutator norm over the translator set (the
    identity translator is inert: its commutator vanishes).  With k = rank,
    the audited inequalities are k <= Tr(P_X P) + (n-1) k epsilon and
    k <= Tr(P_Y P) + (m-1) k epsilon, which force
    epsilon >= 1/(n+m-2).
    """
    if cert.verified_radius is None:
        raise ValueError("certificate has not been verified")
    k = projection.rank
    epsilon = 0.0
    for translator in cert.translators():
        value = translator_commutator_norm(rep, str(translator), projection, tol=tol)
        epsilon = max(epsilon, value)
    diag = projection.diagonal()
    elements = rep.ball.elements
    trace_x = trace_y = 0.0
    partition_total = 0.0
    for piece in cert.x_pieces + cert.y_pieces:
        inv = piece.translator.inverse()
        mask_piece = 0.0
        for pos, w in enumerate(elements):
            if diag[pos] == 0.0:
                continue
            if piece.member(w):
                if piece in cert.x_pieces:
                    trace_x += diag[pos]
                else:
                    trace_y += diag[pos]
            if piece.member(inv * w):
                mask_piece += diag[pos]
        partition_total += mask_piece
    n, m = len(cert.x_pieces), len(cert.y_pieces)
    slack_x = trace_x + (n - 1) * k * epsilon - k
    slack_y = trace_y + (m - 1) * k * epsilon - k
    floor = 1.0 / (n + m - 2)
    return AuditRecord(
        rank=k,
        epsilon=epsilon,
        trace_x=trace_x,
        trace_y=trace_y,
        slack_x=slack_x,
        slack_y=slack_y,
        partition_defect=abs(partition_total - 2 * k),
        epsilon_floor=floor,
        floor_ok=epsilon >= floor - 1e-9,
        inequalities_ok=slack_x >= -AUDIT_SLACK and slack_y >= -AUDIT_SLACK,
    )


@dataclass(frozen=True)
class AuditTrials:
    trials: int
    seed: int
    max_rank: int
    support_radius: int
    min_epsilon: float
    min_slack: float
    floor_failures: int
    inequality_failures: int


def random_audit_trials(rep: TruncatedRep, cert: ParadoxicalCertificate,
                        trials: int, *, max_rank: int = 5, support_radius: int = 6,
                        seed: int = 0) -> AuditTrials:
    """Seeded random projections, audited one by one."""
    from .regrep import random_projection

    rng = np.random.default_rng(seed)
    min_epsilon = math.inf
    min_slack = math.inf
    floor_failures = 0
    inequality_failures = 0
    for _ in range(trials):
        rank = int(rng.integers(1, max_rank + 1))
        projection = random_projection(rep.ball, rank, support_radius, rng)
        record = audit_lower_bound(projection, cert, rep)
        min_epsilon = min(min_epsilon, record.epsilon)
        min_slack = min(min_slack, record.slack_x, record.slack_y)
        if not record.floor_ok:
            floor_failures += 1
        if not record.inequalities_ok:
            inequality_failures += 1
    return AuditTrials(trials=trials, seed=seed, max_rank=max_rank,
                       support_radius=support_radius, min_epsilon=min_epsilon,
                       min_slack=min_slack, floor_failures=floor_failures,
                       inequality_failures=inequality_failures)


# ---------------------------------------------------------------------------
# Radial upper-bound search
# ---------------------------------------------------------------------------


def radial_profile_pairing(profile: Sequence[float]) -> float:
    """Pairing of the radial vector with per-sphere amplitudes beta_1..beta_d."""
    beta = list(profile)
    d = len(beta)
    num = 2.0 * sum(beta[i] * beta[i + 1] * 3 ** (i + 1) for i in range(d - 1))
    den = sum(beta[i] ** 2 * 4 * 3**i for i in range(d))
    if den == 0:
        raise ValueError("zero profile")
    return num / den


@dataclass(frozen=True)
class UpperSearchResult:
    value: float
    pairing: float
    profile: tuple[float, ...]
    converged: bool
    sweeps: int


STEP_TOL = 1e-6
MAX_SWEEPS = 10_000


def cf_upper_search(profile_dim: int, *, max_sweeps: int = MAX_SWEEPS) -> UpperSearchResult:
    """Minimize the rank-one commutator value over radial profiles.

    Coordinate descent on the per-sphere amplitudes: each coordinate update
    solves the one-dimensional Rayleigh problem in closed form.  The start
    profile is the equal-sphere-mass one, which is already feasible, so the
    result can only improve on it.
    """
    d = profile_dim
    if d < 1:
        raise ValueError("profile dimension must be >= 1")
    beta = [1.0 / math.sqrt(4 * 3**i * d) for i in range(d)]
    if d == 1:
        return UpperSearchResult(value=1.0, pairing=0.0, profile=(beta[0],),
                                 converged=True, sweeps=0)

    def weights(j: int) -> tuple[float, float, float, float]:
        # numerator = A + B*t, denominator = C + w*t^2 as functions of beta[j] = t
        a_val = 2.0 * sum(beta[i] * beta[i + 1] * 3 ** (i + 1)
                          for i in range(d - 1) if j not in (i, i + 1))
        b_val = 0.0
        if j >= 1:
            b_val += 2.0 * beta[j - 1] * 3**j
        if j <= d - 2:
            b_val += 2.0 * beta[j + 1] * 3 ** (j + 1)
        c_val = sum(beta[i] ** 2 * 4 * 3**i for i in range(d) if i != j)
        w_val = 4.0 * 3**j
        return a_val, b_val, c_val, w_val

    def objective() -> float:
        return radial_profile_pairing(beta)

    current = objective()
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        for j in range(d):
            a_val, b_val, c_val, w_val = weights(j)
            candidates = [beta[j]]
            if b_val == 0.0:
                candidates.append(0.0)
            else:
                disc = (w_val * a_val) ** 2 + b_val * b_val * w_val * c_val
                root = math.sqrt(max(disc, 0.0))
                candidates.append((-w_val * a_val + root) / (b_val * w_val))
                candidates.append((-w_val * a_val - root) / (b_val * w_val))
            best_t, best_val = beta[j], -math.inf
            for t in candidates:
                denom = c_val + w_val * t * t
                if denom <= 0:
                    continue
                val = (a_val + b_val * t) / denom
                if val > best_val:
                    best_t, best_val = t, val
            beta[j] = best_t
        new = objective()
        if new - current < STEP_TOL:
            current = max(current, new)
            converged = True
            break
        current = new
    norm = math.sqrt(sum(beta[i] ** 2 * 4 * 3**i for i in range(d)))
    profile = tuple(b / norm for b in beta)
    value = math.sqrt(max(0.0, 1.0 - current * current))
    return UpperSearchResult(value=value, pairing=current, profile=profile,
                             converged=converged, sweeps=sweeps)

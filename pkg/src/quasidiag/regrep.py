"""Compression of the left regular representation to a Cayley ball.

The compression of left translation by a generator s is the 0/1 matrix
T_s with T_s[idx(st), idx(t)] = 1 whenever both t and st lie in the ball.
A projection supported one layer inside the ball has a commutator with T_s
that vanishes on and maps into the ball, so norms computed here equal the
norms of the untruncated operators: the module refuses inputs for which
truncation could distort the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .cayley import BallIndex
from .groups import F2_GENERATORS, LETTERS

__all__ = [
    "SparseOperator",
    "TruncatedRep",
    "FiniteProjection",
    "SupportError",
    "PowerIterationError",
    "build_truncated_rep",
    "build_f2_rep",
    "op_norm",
    "power_iteration_norm",
    "commutator_norm",
    "CommutatorResult",
    "random_projection",
    "DEFAULT_NORM_TOL",
    "MAX_POWER_ITERATIONS",
]

DEFAULT_NORM_TOL = 1e-10
MAX_POWER_ITERATIONS = 100_000


class SupportError(ValueError):
    """A vector or projection violates the ball-support exactness contract."""


class PowerIterationError(RuntimeError):
    """Power iteration failed to certify a value; never returns a silent guess."""


@dataclass
class SparseOperator:
    """Sparse matrix wrapper with the flags the toolkit cares about."""

    matrix: sp.csr_matrix
    is_partial_permutation: bool = False

    @classmethod
    def from_triplets(cls, dim: int, triplets: Sequence[tuple[int, int, complex]],
                      *, is_partial_permutation: bool = False) -> "SparseOperator":
        rows = [t[0] for t in triplets]
        cols = [t[1] for t in triplets]
        vals = [t[2] for t in triplets]
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
        op = cls(matrix=mat, is_partial_permutation=is_partial_permutation)
        if is_partial_permutation:
            op._check_partial_permutation()
        return op

    def _check_partial_permutation(self):
        coo = self.matrix.tocoo()
        cols, counts = np.unique(coo.col, return_counts=True)
        if len(cols) and counts.max() > 1:
            raise ValueError("partial permutation flag set but a column has two entries")
        if len(coo.data) and np.max(np.abs(np.abs(coo.data) - 1.0)) > 1e-12:
            raise ValueError("partial permutation entries must have modulus 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def triplets(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        return sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T.tocsr(),
                              is_partial_permutation=self.is_partial_permutation)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass
class TruncatedRep:
    """Per-generator compressions of left translation to a ball."""

    ball: BallIndex
    ops: dict[str, SparseOperator]

    @property
    def radius(self) -> int:
        return self.ball.radius

    @property
    def dim(self) -> int:
        return len(self.ball)

    def operator(self, name: str) -> SparseOperator:
        try:
            return self.ops[name]
        except KeyError:
            raise KeyError(f"no generator named {name!r}; have {sorted(self.ops)}") from None


def build_truncated_rep(ball_index: BallIndex, generators: dict) -> TruncatedRep:
    """Compress left translation by each named generator to the ball."""
    index = ball_index.index
    ops = {}
    for name, g in generators.items():
        triplets = []
        for col, t in enumerate(ball_index.elements):
            st = g * t
            row = index.get(st)
            if row is not None:
                triplets.append((row, col, 1.0))
        ops[name] = SparseOperator.from_triplets(len(ball_index), triplets,
                                                 is_partial_permutation=True)
    return TruncatedRep(ball=ball_index, ops=ops)


def build_f2_rep(ball_index: BallIndex) -> TruncatedRep:
    gens = {LETTERS[i]: F2_GENERATORS[i] for i in range(4)}
    return build_truncated_rep(ball_index, gens)


F2_INVERSE_NAME = {"a": "A", "A": "a", "b": "B", "B": "b", "e": "e"}


# ---------------------------------------------------------------------------
# Finitely supported projections
# ---------------------------------------------------------------------------

ORTHONORMAL_TOL = 1e-12


class FiniteProjection:
    """Orthonormal frame spanning a projection supported inside B_{R-1}.

    The frame must vanish outside the prefix of the ball basis of radius
    ``support_radius``; that is what makes commutators with the compressed
    generators exact.
    """

    def __init__(self, ball_index: BallIndex, frame: np.ndarray, support_radius: int):
        frame = np.atleast_2d(np.asarray(frame))
        if frame.shape[0] == len(ball_index) and frame.shape[1] != len(ball_index):
            pass
        elif frame.shape[1] == len(ball_index):
            frame = frame.T
        if frame.shape[0] != len(ball_index):
            raise ValueError("frame shape does not match ball dimension")
        if support_radius > ball_index.radius - 1:
            raise SupportError(
                f"support radius {support_radius} violates the exactness contract "
                f"(needs <= {ball_index.radius - 1})")
        cut = ball_index.size_within(support_radius)
        if frame.shape[0] > cut and np.any(frame[cut:, :] != 0):
            raise SupportError("frame has weight outside the declared support ball")
        gram = frame.conj().T @ frame
        if np.max(np.abs(gram - np.eye(frame.shape[1]))) > ORTHONORMAL_TOL:
            raise ValueError("frame is not orthonormal to 1e-12")
        self.ball = ball_index
        self.frame = frame
        self.support_radius = support_radius

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.frame @ (self.frame.conj().T @ v)

    def diagonal(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.frame.conj(), self.frame).real


def random_projection(ball_index: BallIndex, rank: int, support_radius: int,
                      rng: np.random.Generator) -> FiniteProjection:
    """Seeded random rank-k projection supported in the given sub-ball."""
    cut = ball_index.size_within(support_radius)
    if rank > cut:
        raise ValueError("rank exceeds support dimension")
    block = rng.standard_normal((cut, rank))
    q, _ = np.linalg.qr(block)
    frame = np.zeros((len(ball_index), rank))
    frame[:cut, :] = q[:, :rank]
    return FiniteProjection(ball_index, frame, support_radius)


# ---------------------------------------------------------------------------
# Operator norm by power iteration
# ---------------------------------------------------------------------------


def power_iteration_norm(apply_op: Callable[[np.ndarray], np.ndarray],
                         apply_adj: Callable[[np.ndarray], np.ndarray],
                         dim: int, *, tol: float = DEFAULT_NORM_TOL,
                         max_iter: int = MAX_POWER_ITERATIONS) -> float:
    """Largest singular value via power iteration on the normal operator.

    The seed vector is the normalized all-ones vector, so runs are
    deterministic.  Acceptance requires both a stagnating Rayleigh estimate
    and a small residual for the normal-operator eigenproblem; hitting the
    iteration cap raises instead of returning an uncertified value.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if dim == 0:
        return 0.0
    v = np.full(dim, 1.0 / np.sqrt(dim))
    sigma_prev = -1.0
    stagnant = 0
    for iteration in range(max_iter):
        w = apply_op(v)
        norm_w = float(np.linalg.norm(w))
        if norm_w < 1e-150:
            if iteration == 0:
                # all-ones seed may sit in the kernel; retry from a fixed RNG
                rng = np.random.default_rng(0)
                v = rng.standard_normal(dim)
                v /= np.linalg.norm(v)
                w = apply_op(v)
                norm_w = float(np.linalg.norm(w))
                if norm_w < 1e-150:
                    return 0.0
            else:
                return 0.0
        z = apply_adj(w)
        sigma = norm_w  # ||Av|| with ||v|| = 1 is a certified lower bound
        norm_z = float(np.linalg.norm(z))
        if norm_z < 1e-150:
            return sigma
        if abs(sigma - sigma_prev) <= tol * max(sigma, 1.0):
            stagnant += 1
            if stagnant >= 3:
                residual = float(np.linalg.norm(z - (sigma * sigma) * v))
                if residual <= np.sqrt(tol) * max(sigma * sigma, 1.0):
                    return sigma
        else:
            stagnant = 0
        sigma_prev = sigma
        v = z / norm_z
    raise PowerIterationError(
        f"no certified convergence after {max_iter} iterations (last estimate {sigma_prev})")


def op_norm(op: SparseOperator, tol: float = DEFAULT_NORM_TOL,
            max_iter: int = MAX_POWER_ITERATIONS) -> float:
    """Operator norm of a sparse operator."""
    mat = op.matrix
    adj = mat.conj().T.tocsr()
    return power_iteration_norm(lambda v: mat @ v, lambda v: adj @ v,
                                op.dim, tol=tol, max_iter=max_iter)


# ---------------------------------------------------------------------------
# Exact commutator norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommutatorResult:
    value: float
    exact_on_full_space: bool
    generator: str
    radius: int


def _require_exact_support(rep: TruncatedRep, projection: FiniteProjection,
                           word_length: int = 1):
    if projection.ball is not rep.ball:
        raise ValueError("projection was built on a different ball")
    if projection.support_radius > rep.radius - word_length:
        raise SupportError(
            f"projection support radius {projection.support_radius} too large for "
            f"exact commutators with a length-{word_length} translator at radius {rep.radius}")


def _tall_matrix_norm(block: np.ndarray, tol: float) -> float:
    """Top singular value of a tall dim x k block via its k x k normal matrix."""
    normal = block.conj().T @ block
    normal_adj = normal.conj().T
    top = power_iteration_norm(lambda v: normal @ v, lambda v: normal_adj @ v,
                               normal.shape[0], tol=tol)
    return math.sqrt(max(top, 0.0))


def _compressed_commutator_norm(apply_word, apply_word_adj,
                                projection: FiniteProjection,
                                tol: float) -> float:
    """Norm of X = U P - P U through the block identity.

    X = (1-P)UP - PU(1-P) with orthogonal ranges and domains, so the norm is
    max(||(1-P)UP||, ||PU(1-P)||); with P = V V* those are the top singular
    values of the tall blocks (1-P)UV and (1-P)U*V.  Each block has rank at
    most the frame rank, so the power iteration runs on a small normal
    matrix.  Swapping U and U* permutes the two blocks, which makes the
    adjoint symmetry of the result exact.
    """
    frame = projection.frame
    forward = apply_word(frame)
    off_forward = forward - frame @ (frame.conj().T @ forward)
    backward = apply_word_adj(frame)
    off_backward = backward - frame @ (frame.conj().T @ backward)
    return max(_tall_matrix_norm(off_forward, tol),
               _tall_matrix_norm(off_backward, tol))


def commutator_norm(rep: TruncatedRep, generator: str, projection: FiniteProjection,
                    *, tol: float = DEFAULT_NORM_TOL) -> CommutatorResult:
    """Norm of [T_s, P], exact for the untruncated operators.

    The projection must be supported in B_{R-1}; then the commutator vanishes
    on and maps into the span of the ball, so the compressed norm equals the
    norm on the full space.
    """
    _require_exact_support(rep, projection, 1)
    t = rep.operator(generator).matrix
    t_adj = rep.operator(F2_INVERSE_NAME[generator]).matrix \
        if generator in F2_INVERSE_NAME else t.conj().T.tocsr()
    value = _compressed_commutator_norm(lambda v: t @ v, lambda v: t_adj @ v,
                                        projection, tol)
    return CommutatorResult(value=value, exact_on_full_space=True,
                            generator=generator, radius=rep.radius)


def translator_commutator_norm(rep: TruncatedRep, letters: str,
                               projection: FiniteProjection,
                               *, tol: float = DEFAULT_NORM_TOL) -> float:
    """Norm of [T_w, P] for a word w given by its letters, exact when the
    projection leaves len(w) layers of headroom in the ball."""
    if letters in ("", "e"):
        return 0.0
    _require_exact_support(rep, projection, len(letters))
    mats = [rep.operator(ch).matrix for ch in letters]
    adj_mats = [rep.operator(F2_INVERSE_NAME[ch]).matrix for ch in reversed(letters)]

    def apply_word(v):
        for m in reversed(mats):
            v = m @ v
        return v

    def apply_word_adj(v):
        for m in reversed(adj_mats):
            v = m @ v
        return v

    return _compressed_commutator_norm(apply_word, apply_word_adj, projection, tol)

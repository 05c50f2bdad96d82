"""Dense small-matrix numerics for constraint kernels, metric-orthogonal
projectors and impact (reflection) matrices.

Conventions: the metric G is the kinetic-energy bilinear form, constraint
matrices act on velocities from the left (admissible velocities span the
kernel), and the reflection operator is R = I - (1+mu) P where P is the
G-orthogonal projector onto the complement of ker B.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    InadmissiblePreVelocity,
    MuOutOfRange,
    NestingViolated,
    RankDeficient,
    SingularGram,
)

DEFAULT_RANK_TOL = 1e-10
DEFAULT_SPD_TOL = 1e-12


def _as_matrix(entries):
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Metric:
    """Symmetric positive-definite kinetic-energy matrix."""

    entries: np.ndarray
    tol_spd: float = DEFAULT_SPD_TOL

    def __post_init__(self):
        a = _as_matrix(self.entries)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"metric must be square, got {a.shape}")
        scale = max(1.0, np.abs(a).max())
        if np.abs(a - a.T).max() > self.tol_spd * scale:
            raise ValueError("metric is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        # Cholesky is the cheapest definiteness certificate; cache the factor
        # for the solves in g_projector and kinetic_energy callers.
        try:
            chol = scipy.linalg.cho_factor(a)
        except scipy.linalg.LinAlgError as exc:
            raise ValueError("metric is not positive definite") from exc
        if min(abs(chol[0][i, i]) for i in range(a.shape[0])) ** 2 <= self.tol_spd * scale:
            raise ValueError("metric is not positive definite at tol_spd")
        object.__setattr__(self, "_chol", chol)

    @property
    def n(self):
        return self.entries.shape[0]

    def solve(self, rhs):
        """G^-1 rhs via the cached Cholesky factor."""
        return scipy.linalg.cho_solve(self._chol, rhs)


@dataclass(frozen=True)
class ConstraintMatrix:
    """Full-row-rank matrix whose kernel is the admissible-velocity space.

    Zero rows are allowed and mean "no constraint" (kernel = everything).
    """

    entries: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        a = _as_matrix(self.entries)
        if not 0.0 < self.rank_tol < 1.0:
            raise ValueError("rank_tol must lie in (0, 1)")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.rows and numerical_rank(a, self.rank_tol) < self.rows:
            raise RankDeficient(
                f"constraint matrix {a.shape} has numerical row rank "
                f"< {self.rows} at rank_tol={self.rank_tol}"
            )

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    @property
    def is_empty(self):
        return self.rows == 0


def empty_constraint(n):
    """The trivial constraint on an n-dimensional velocity space."""
    return ConstraintMatrix(np.zeros((0, n)))


def numerical_rank(a, rank_tol=DEFAULT_RANK_TOL):
    if a.size == 0:
        return 0
    s = scipy.linalg.svdvals(a)
    return int(np.count_nonzero(s > rank_tol * s[0]))


@dataclass(frozen=True)
class KernelBasis:
    """Orthonormal columns spanning the numerical kernel of a constraint."""

    cols: np.ndarray

    @property
    def dim(self):
        return self.cols.shape[1]


def kernel_basis(M: ConstraintMatrix, rank_tol=None) -> KernelBasis:
    """Orthonormal basis of ker M; kernel dim = cols - rank."""
    tol = M.rank_tol if rank_tol is None else rank_tol
    if M.is_empty:
        return KernelBasis(np.eye(M.cols))
    if numerical_rank(M.entries, tol) < M.rows:
        raise RankDeficient("constraint matrix lost full row rank")
    z = scipy.linalg.null_space(M.entries, rcond=tol)
    return KernelBasis(z)


@dataclass(frozen=True)
class Projector:
    """G-orthogonal projector onto the complement W of ker B."""

    entries: np.ndarray
    metric: Metric = field(repr=False, default=None)
    constraint: ConstraintMatrix = field(repr=False, default=None)

    @property
    def n(self):
        return self.entries.shape[0]


def g_projector(G: Metric, B: ConstraintMatrix) -> Projector:
    """P = G^-1 B^T (B G^-1 B^T)^-1 B, computed by symmetric solves.

    (I - P) is the G-orthogonal projection onto ker B.
    """
    if B.cols != G.n:
        raise ValueError(f"dimension mismatch: G is {G.n}x{G.n}, B has {B.cols} cols")
    if B.is_empty:
        return Projector(np.zeros((G.n, G.n)), metric=G, constraint=B)
    x = G.solve(B.entries.T)          # G^-1 B^T
    gram = B.entries @ x
    gram = 0.5 * (gram + gram.T)
    try:
        chol = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise SingularGram("B G^-1 B^T is numerically singular") from exc
    p = x @ scipy.linalg.cho_solve(chol, B.entries)
    return Projector(p, metric=G, constraint=B)


def projector_from_kernel(G: Metric, Z: KernelBasis) -> np.ndarray:
    """Kernel-side construction P = I - Z (Z^T G Z)^-1 Z^T G.

    Independent of the Gram-matrix route; kept as a cross-check oracle.
    """
    z = Z.cols
    gz = G.entries @ z
    small = z.T @ gz
    return np.eye(G.n) - z @ np.linalg.solve(small, gz.T)


@dataclass(frozen=True)
class NestingReport:
    passed: bool
    residual: float
    tol: float
    worst_vector: np.ndarray


def validate_nesting(A: ConstraintMatrix, B: ConstraintMatrix, tol=1e-10) -> NestingReport:
    """Check ker B <= ker A: every B-admissible velocity is A-admissible."""
    if A.cols != B.cols:
        raise ValueError("A and B must act on the same velocity space")
    z = kernel_basis(B).cols
    if A.is_empty or z.shape[1] == 0:
        return NestingReport(True, 0.0, tol, np.zeros(A.cols))
    res = A.entries @ z
    norms = np.abs(res).max(axis=0)
    worst = int(np.argmax(norms))
    a_scale = max(np.abs(A.entries).max(), 1e-300)
    return NestingReport(
        passed=bool(norms[worst] <= tol * a_scale),
        residual=float(norms[worst]),
        tol=tol,
        worst_vector=z[:, worst].copy(),
    )


@dataclass(frozen=True)
class ImpactMatrix:
    """Reflection operator R = I - (1+mu) P with its provenance."""

    entries: np.ndarray
    mu: float
    metric: Metric = field(repr=False, default=None)
    constraint_a: ConstraintMatrix = field(repr=False, default=None)
    constraint_b: ConstraintMatrix = field(repr=False, default=None)


def impact_matrix(G: Metric, A: ConstraintMatrix, B: ConstraintMatrix, mu: float,
                  nesting_tol=1e-10) -> ImpactMatrix:
    """Build the impact map R = I - (1+mu) P on the wall's velocity space."""
    if not 0.0 <= mu <= 1.0:
        raise MuOutOfRange(f"mu={mu} outside [0, 1]")
    report = validate_nesting(A, B, tol=nesting_tol)
    if not report.passed:
        raise NestingViolated(
            f"ker B not contained in ker A (residual {report.residual:.3e})"
        )
    p = g_projector(G, B)
    r = np.eye(G.n) - (1.0 + mu) * p.entries
    return ImpactMatrix(r, mu=mu, metric=G, constraint_a=A, constraint_b=B)


def apply_impact(R: ImpactMatrix, v_minus, A: ConstraintMatrix = None, tol=1e-8):
    """v+ = R v-, after checking the pre-impact velocity is A-admissible."""
    v = np.asarray(v_minus, dtype=float)
    if A is None:
        A = R.constraint_a
    if A is not None and not A.is_empty:
        scale = max(1.0, float(np.abs(v).max())) * max(1.0, np.abs(A.entries).max())
        res = float(np.abs(A.entries @ v).max())
        if res > tol * scale:
            raise InadmissiblePreVelocity(
                f"|A v-|_max = {res:.3e} exceeds tol {tol:.1e} (scaled)"
            )
    return R.entries @ v


def kinetic_energy(G: Metric, v) -> float:
    """T = 1/2 v^T G v."""
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ G.entries @ v)

"""Continuous-time integration of the Lagrange-d'Alembert equations between
impacts.

The smooth-arc equations are solved in multiplier form

    G(x) a = f(x, v) - grad V(x) + A(x)^T lambda,
    A(x) a + (dA/dt) v = 0,

where f collects metric-derivative (Christoffel) terms.  Both built-in ball
scenes use quasi-velocities with constant G and A, so f and dA/dt vanish
there; the generic chart path evaluates them by central finite differences.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularGram, SingularKKT
from .geometry import ConstraintMatrix, Metric, kinetic_energy
from .models import KIND_GENERIC, MechanicalSystem, kinematics, normalize_config


@dataclass(frozen=True)
class FlowState:
    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


@dataclass(frozen=True)
class IntegratorSettings:
    dt: float = 1e-3
    drift_tol: float = 1e-10
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.drift_tol <= 0:
            raise ValueError("drift_tol must be positive")


def _metric_derivative_force(sys, x, v, fd_step):
    """Christoffel force f = -(dG/dt) v + 1/2 grad_x (v^T G v), by central FD."""
    n = sys.n
    h = fd_step * (1.0 + float(np.linalg.norm(x)))
    f = np.zeros(n)
    gdot = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        gp = sys.metric_at(x + e).entries
        gm = sys.metric_at(x - e).entries
        dg = (gp - gm) / (2.0 * h)
        f[k] += 0.5 * float(v @ dg @ v)
        gdot += dg * v[k]          # xdot = v on a generic chart
    f -= gdot @ v
    return f


def _constraint_rate_term(sys, x, v, a_mat, fd_step):
    """(dA/dt) v along the flow, by central FD in the direction xdot = v."""
    h = fd_step * (1.0 + float(np.linalg.norm(x)))
    ap = sys.a_at(x + h * v).entries
    am = sys.a_at(x - h * v).entries
    return ((ap - am) / (2.0 * h)) @ v


def accel_and_multipliers(sys: MechanicalSystem, x, v, fd_step=1e-6):
    """Acceleration and constraint multipliers at (x, v).

    With no active constraint this reduces to the unconstrained Lagrange
    equations; multipliers come back as an empty vector.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    g = sys.metric_at(x)
    rhs = -sys.potential_covector(x)
    if sys.kind == KIND_GENERIC and not sys.constant_fields:
        rhs = rhs + _metric_derivative_force(sys, x, v, fd_step)
    a_mat = sys.a_at(x)
    if a_mat.is_empty:
        return g.solve(rhs), np.zeros(0)
    m = a_mat.rows
    if sys.constant_fields or sys.kind != KIND_GENERIC:
        rate = np.zeros(m)
    else:
        rate = _constraint_rate_term(sys, x, v, a_mat, fd_step)
    n = sys.n
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = g.entries
    kkt[:n, n:] = -a_mat.entries.T
    kkt[n:, :n] = a_mat.entries
    full_rhs = np.concatenate([rhs, -rate])
    try:
        sol = scipy.linalg.solve(kkt, full_rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularKKT("constrained-dynamics saddle system is singular") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularKKT("constrained-dynamics saddle system is singular")
    return sol[:n], sol[n:]


def project_velocity(G: Metric, A: ConstraintMatrix, v):
    """G-closest admissible velocity: v' = (I - P_A) v with A v' = 0."""
    v = np.asarray(v, dtype=float)
    if A is None or A.is_empty:
        return v
    x = G.solve(A.entries.T)
    gram = A.entries @ x
    try:
        chol = scipy.linalg.cho_factor(0.5 * (gram + gram.T))
    except scipy.linalg.LinAlgError as exc:
        raise SingularGram("A G^-1 A^T is numerically singular") from exc
    return v - x @ scipy.linalg.cho_solve(chol, A.entries @ v)


def step(sys: MechanicalSystem, s: FlowState, cfg: IntegratorSettings) -> FlowState:
    """One classical 4-stage explicit step, then velocity projection."""
    h = cfg.dt
    x0, v0 = s.x, s.v

    def rates(x, v):
        a, _ = accel_and_multipliers(sys, x, v, cfg.fd_step)
        return kinematics(sys, x, v), a

    kx1, kv1 = rates(x0, v0)
    kx2, kv2 = rates(x0 + 0.5 * h * kx1, v0 + 0.5 * h * kv1)
    kx3, kv3 = rates(x0 + 0.5 * h * kx2, v0 + 0.5 * h * kv2)
    kx4, kv4 = rates(x0 + h * kx3, v0 + h * kv3)
    x1 = x0 + (h / 6.0) * (kx1 + 2 * kx2 + 2 * kx3 + kx4)
    v1 = v0 + (h / 6.0) * (kv1 + 2 * kv2 + 2 * kv3 + kv4)
    x1 = normalize_config(sys, x1)
    a_mat = sys.a_at(x1)
    if not a_mat.is_empty:
        v1 = project_velocity(sys.metric_at(x1), a_mat, v1)
    return FlowState(s.t + h, x1, v1)


def energy(sys: MechanicalSystem, s: FlowState) -> float:
    """Total energy T + V."""
    return kinetic_energy(sys.metric_at(s.x), s.v) + sys.potential_at(s.x)

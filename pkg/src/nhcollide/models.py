"""Concrete mechanical systems.

A MechanicalSystem bundles the kinetic metric, potential, nonholonomic
constraint A and optional wall (guard + wall constraint B) behind pure
per-configuration evaluators.  Two built-in rough-ball scenes mirror the
classical setups: a ball thrown to a rough floor, and a ball rolling on a
rough floor into a rough wall.  Velocities are quasi-velocities (v_S, omega),
so both scenes have constant fields.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NestingViolated, RankDeficient, SchemaError
from .geometry import (
    ConstraintMatrix,
    Metric,
    empty_constraint,
    kinetic_energy,
    validate_nesting,
)
from .quaternion import quat_derivative, quat_normalize

KIND_GENERIC = "generic"
KIND_BALL_FLOOR = "ball_floor"
KIND_BALL_WALL = "ball_wall"

# numeric codes shared with the stepping kernels
KIND_CODES = {KIND_GENERIC: 0, KIND_BALL_FLOOR: 1, KIND_BALL_WALL: 2}


@dataclass(frozen=True)
class BallParams:
    """Ball mass/inertia/radius and ambient gravity."""

    mass: float = 1.0
    inertia: float = 0.4
    radius: float = 1.0
    gravity: float = 9.81

    def __post_init__(self):
        if self.mass <= 0 or self.inertia <= 0 or self.radius <= 0:
            raise ValueError("mass, inertia and radius must be positive")
        if self.gravity < 0:
            raise ValueError("gravity must be nonnegative")

    @property
    def j_prime(self):
        """J + r^2 m, the inertia about the contact point."""
        return self.inertia + self.radius ** 2 * self.mass

    @property
    def j_tilde(self):
        """J + r^2 m / 2."""
        return self.inertia + self.radius ** 2 * self.mass / 2.0


@dataclass(frozen=True)
class BallState:
    """Free-ball state: centre position, orientation, quasi-velocities."""

    position: np.ndarray
    quaternion: np.ndarray
    velocity: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "quaternion", quat_normalize(self.quaternion))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))


@dataclass(frozen=True)
class ReducedWallState:
    """Wall-scene contact state (v1, v2, w3); the rest follows from rolling."""

    v1: float
    v2: float
    w3: float


@dataclass(frozen=True)
class WallSpec:
    """Affine guard h(x) = guard_const + guard_linear . x and wall constraint B."""

    guard_const: float
    guard_linear: np.ndarray
    b_at: Callable[[np.ndarray], ConstraintMatrix]

    def guard(self, x):
        return self.guard_const + float(self.guard_linear @ x)


@dataclass(frozen=True)
class MechanicalSystem:
    """Chart-based natural system L = T - V with constraint A and optional wall."""

    kind: str
    n: int                    # velocity dimension
    config_dim: int
    metric_at: Callable[[np.ndarray], Metric]
    potential_at: Callable[[np.ndarray], float]
    potential_covector: Callable[[np.ndarray], np.ndarray]  # w with dV/dt = w . v
    a_at: Callable[[np.ndarray], ConstraintMatrix]
    wall: Optional[WallSpec] = None
    constant_fields: bool = False
    params: object = None

    def guard(self, x):
        if self.wall is None:
            raise ValueError("system has no wall")
        return self.wall.guard(x)


def kinematics(sys: MechanicalSystem, x, v):
    """Configuration rate dx/dt for velocity v (quaternion rate for balls)."""
    if sys.kind == KIND_GENERIC:
        return np.asarray(v, dtype=float)
    out = np.empty(sys.config_dim)
    if sys.kind == KIND_BALL_FLOOR:
        out[0:3] = v[0:3]
        out[3:7] = quat_derivative(x[3:7], v[3:6])
    elif sys.kind == KIND_BALL_WALL:
        out[0:2] = v[0:2]
        out[2:6] = quat_derivative(x[2:6], v[2:5])
    else:
        raise ValueError(f"unknown system kind {sys.kind!r}")
    return out


def normalize_config(sys: MechanicalSystem, x):
    """Renormalize the quaternion block, if the system carries one."""
    x = np.asarray(x, dtype=float).copy()
    if sys.kind == KIND_BALL_FLOOR:
        x[3:7] = quat_normalize(x[3:7])
    elif sys.kind == KIND_BALL_WALL:
        x[2:6] = quat_normalize(x[2:6])
    return x


def guard_rate(sys: MechanicalSystem, x, v):
    """dh/dt along the flow (affine guard, so just the chain rule)."""
    return float(sys.wall.guard_linear @ kinematics(sys, x, v))


# ---------------------------------------------------------------------------
# built-in scenes


def floor_constraint_b(p: BallParams) -> np.ndarray:
    r = p.radius
    return np.array([
        [1.0, 0.0, 0.0, 0.0, -r, 0.0],
        [0.0, 1.0, 0.0, r, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    ])


def wall_constraint_a(p: BallParams) -> np.ndarray:
    r = p.radius
    return np.array([
        [1.0, 0.0, 0.0, -r, 0.0],
        [0.0, 1.0, r, 0.0, 0.0],
    ])


def wall_constraint_b(p: BallParams) -> np.ndarray:
    r = p.radius
    return np.array([
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, -r],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, r, 0.0, 0.0],
    ])


def build_ball_floor_scene(p: BallParams) -> MechanicalSystem:
    """Ball in free flight above a rough floor at z = 0; contact at z_S = r.

    State: config = (position_S, quaternion), velocity = (v_S, omega), n = 6.
    """
    m, j, g = p.mass, p.inertia, p.gravity
    metric = Metric(np.diag([m, m, m, j, j, j]))
    w = np.array([0.0, 0.0, m * g, 0.0, 0.0, 0.0])
    a = empty_constraint(6)
    b = ConstraintMatrix(floor_constraint_b(p))
    guard_linear = np.zeros(7)
    guard_linear[2] = 1.0
    return MechanicalSystem(
        kind=KIND_BALL_FLOOR,
        n=6,
        config_dim=7,
        metric_at=lambda x: metric,
        potential_at=lambda x: m * g * x[2],
        potential_covector=lambda x: w,
        a_at=lambda x: a,
        wall=WallSpec(-p.radius, guard_linear, lambda x: b),
        constant_fields=True,
        params=p,
    )


def build_ball_wall_scene(p: BallParams, potential=None) -> MechanicalSystem:
    """Ball rolling on a rough floor, meeting a rough wall at x_S = r.

    State: config = (x_S, y_S, quaternion), velocity = (v1, v2, w1, w2, w3),
    n = 5.  `potential`, if given, maps (x_S, y_S) to (V, (dV/dx, dV/dy)).
    """
    m, j = p.mass, p.inertia
    metric = Metric(np.diag([m, m, j, j, j]))
    a = ConstraintMatrix(wall_constraint_a(p))
    b = ConstraintMatrix(wall_constraint_b(p))
    guard_linear = np.zeros(6)
    guard_linear[0] = 1.0

    if potential is None:
        pot_at = lambda x: 0.0
        zero_w = np.zeros(5)
        pot_cov = lambda x: zero_w
        constant = True
    else:
        def pot_at(x):
            return float(potential(x[0], x[1])[0])

        def pot_cov(x):
            grad = potential(x[0], x[1])[1]
            return np.array([grad[0], grad[1], 0.0, 0.0, 0.0])

        constant = False

    return MechanicalSystem(
        kind=KIND_BALL_WALL,
        n=5,
        config_dim=6,
        metric_at=lambda x: metric,
        potential_at=pot_at,
        potential_covector=pot_cov,
        a_at=lambda x: a,
        wall=WallSpec(-p.radius, guard_linear, lambda x: b),
        constant_fields=constant,
        params=p,
    )


# ---------------------------------------------------------------------------
# closed-form impact oracles


def ball_floor_impact_closed_form(p: BallParams, v_s, omega, mu=1.0):
    """Component formulas for the floor impact, restitution mu in [0, 1]."""
    m, j, r = p.mass, p.inertia, p.radius
    jp = p.j_prime
    v1, v2, v3 = np.asarray(v_s, dtype=float)
    w1, w2, w3 = np.asarray(omega, dtype=float)
    v_plus = np.array([
        (m * r * r - mu * j) / jp * v1 + j * r * (1 + mu) / jp * w2,
        (m * r * r - mu * j) / jp * v2 - j * r * (1 + mu) / jp * w1,
        -mu * v3,
    ])
    w_plus = np.array([
        -r * m * (1 + mu) / jp * v2 + (j - mu * m * r * r) / jp * w1,
        r * m * (1 + mu) / jp * v1 + (j - mu * m * r * r) / jp * w2,
        w3,
    ])
    return v_plus, w_plus


def ball_wall_impact_closed_form(p: BallParams, s: ReducedWallState) -> ReducedWallState:
    """Elastic wall impact in reduced coordinates (v1, v2, w3)."""
    m, j, r = p.mass, p.inertia, p.radius
    jt, jp = p.j_tilde, p.j_prime
    return ReducedWallState(
        v1=-s.v1,
        v2=r * r * m / (2 * jt) * s.v2 + r * j / jt * s.w3,
        w3=jp / (r * jt) * s.v2 - r * r * m / (2 * jt) * s.w3,
    )


def rolling_velocity_completion(p: BallParams, s: ReducedWallState) -> np.ndarray:
    """Full 5-velocity from the reduced state via the rolling relations."""
    r = p.radius
    return np.array([s.v1, s.v2, -s.v2 / r, s.v1 / r, s.w3])


def contact_angular_momentum(p: BallParams, v_s, omega) -> np.ndarray:
    """Angular momentum about the floor-contact point: m (CS x v_S) + J omega."""
    cs = np.array([0.0, 0.0, p.radius])
    return p.mass * np.cross(cs, np.asarray(v_s, dtype=float)) + \
        p.inertia * np.asarray(omega, dtype=float)


def floor_scene_energy(p: BallParams, state: BallState) -> float:
    sys = build_ball_floor_scene(p)
    v = np.concatenate([state.velocity, state.omega])
    x = np.concatenate([state.position, state.quaternion])
    return kinetic_energy(sys.metric_at(x), v) + sys.potential_at(x)


# ---------------------------------------------------------------------------
# generic chart systems from plain configuration data


def _require(cfg, key, path):
    if key not in cfg:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return cfg[key]


def _matrix_field(cfg, key, path, rows=None, cols=None, required=True):
    if key not in cfg:
        if required:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return None
    try:
        a = np.asarray(cfg[key], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{path}.{key}", "not a numeric matrix") from None
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, cols if cols else 0)
    if a.ndim != 2:
        raise SchemaError(f"{path}.{key}", f"expected a matrix, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise SchemaError(f"{path}.{key}", f"expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise SchemaError(f"{path}.{key}", f"expected {cols} cols, got {a.shape[1]}")
    return a


def generic_system_from_config(cfg: dict, path="scene") -> MechanicalSystem:
    """Build a constant-coefficient chart system from plain data.

    Expected keys: n, metric (n x n), potential {const, linear}, A (rows x n,
    may be empty), optional wall {guard_const, guard_linear, B}.
    """
    n = _require(cfg, "n", path)
    if not isinstance(n, int) or n <= 0:
        raise SchemaError(f"{path}.n", "must be a positive integer")

    g_entries = _matrix_field(cfg, "metric", path, rows=n, cols=n)
    try:
        metric = Metric(g_entries)
    except ValueError as exc:
        raise SchemaError(f"{path}.metric", str(exc)) from None

    pot = cfg.get("potential", {})
    if not isinstance(pot, dict):
        raise SchemaError(f"{path}.potential", "expected an object")
    pot_const = float(pot.get("const", 0.0))
    pot_linear = np.asarray(pot.get("linear", np.zeros(n)), dtype=float)
    if pot_linear.shape != (n,):
        raise SchemaError(f"{path}.potential.linear", f"expected length {n}")

    a_entries = _matrix_field(cfg, "A", path, cols=n, required=False)
    if a_entries is None:
        a_entries = np.zeros((0, n))
    try:
        a = ConstraintMatrix(a_entries)
    except RankDeficient as exc:
        raise RankDeficient(f"{path}.A: {exc}") from None

    wall = None
    if cfg.get("wall") is not None:
        wcfg = cfg["wall"]
        if not isinstance(wcfg, dict):
            raise SchemaError(f"{path}.wall", "expected an object")
        guard_const = float(_require(wcfg, "guard_const", f"{path}.wall"))
        guard_linear = np.asarray(_require(wcfg, "guard_linear", f"{path}.wall"), dtype=float)
        if guard_linear.shape != (n,):
            raise SchemaError(f"{path}.wall.guard_linear", f"expected length {n}")
        b_entries = _matrix_field(wcfg, "B", f"{path}.wall", cols=n)
        try:
            b = ConstraintMatrix(b_entries)
        except RankDeficient as exc:
            raise RankDeficient(f"{path}.wall.B: {exc}") from None
        report = validate_nesting(a, b)
        if not report.passed:
            raise NestingViolated(
                f"{path}.wall: ker B not contained in ker A "
                f"(residual {report.residual:.3e})"
            )
        wall = WallSpec(guard_const, guard_linear, lambda x, _b=b: _b)

    return MechanicalSystem(
        kind=KIND_GENERIC,
        n=n,
        config_dim=n,
        metric_at=lambda x, _m=metric: _m,
        potential_at=lambda x: pot_const + float(pot_linear @ x),
        potential_covector=lambda x: pot_linear,
        a_at=lambda x: a,
        wall=wall,
        constant_fields=True,
        params=None,
    )

"""Scene-file parsing/emission and tabular output.

A scene is a single JSON document with top-level keys scene_kind, params,
initial_state, mu, integrator, t_max.  Trajectory and event tables are
comma-separated with a header row and 17-significant-digit floats.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import FlowState, energy
from .errors import SchemaError
from .models import (
    KIND_BALL_FLOOR,
    KIND_BALL_WALL,
    KIND_GENERIC,
    BallParams,
    MechanicalSystem,
    ReducedWallState,
    build_ball_floor_scene,
    build_ball_wall_scene,
    generic_system_from_config,
    rolling_velocity_completion,
)
from .simulate import SimulationSettings, Trajectory

SCENE_KINDS = (KIND_BALL_FLOOR, KIND_BALL_WALL, KIND_GENERIC)

_INTEGRATOR_DEFAULTS = {
    "dt": 1e-3,
    "event_tol": 1e-12,
    "graze_tol": 1e-8,
    "max_events": 10_000,
    "min_flight": 1e-9,
}


@dataclass
class SceneConfig:
    """Validated, normalized scene description (plain data only)."""

    scene_kind: str
    params: dict
    initial_state: dict
    mu: float
    integrator: dict
    t_max: float


def _float_field(obj, key, path, default=None, minimum=None, strict_min=False):
    if key not in obj:
        if default is None:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return float(default)
    try:
        val = float(obj[key])
    except (TypeError, ValueError):
        raise SchemaError(f"{path}.{key}", "not a number") from None
    if minimum is not None:
        if strict_min and val <= minimum:
            raise SchemaError(f"{path}.{key}", f"must be > {minimum}")
        if not strict_min and val < minimum:
            raise SchemaError(f"{path}.{key}", f"must be >= {minimum}")
    return val


def _vector_field(obj, key, path, length, default=None):
    if key not in obj:
        if default is None:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return [float(x) for x in default]
    val = obj[key]
    if not isinstance(val, (list, tuple)) or len(val) != length:
        raise SchemaError(f"{path}.{key}", f"expected a list of {length} numbers")
    try:
        return [float(x) for x in val]
    except (TypeError, ValueError):
        raise SchemaError(f"{path}.{key}", "non-numeric entry") from None


def _normalize_integrator(raw):
    if not isinstance(raw, dict):
        raise SchemaError("integrator", "expected an object")
    out = {}
    for key, default in _INTEGRATOR_DEFAULTS.items():
        if key == "max_events":
            out[key] = int(raw.get(key, default))
            if out[key] <= 0:
                raise SchemaError("integrator.max_events", "must be positive")
        else:
            out[key] = _float_field(raw, key, "integrator", default=default,
                                    minimum=0.0, strict_min=True)
    unknown = set(raw) - set(_INTEGRATOR_DEFAULTS)
    if unknown:
        raise SchemaError(f"integrator.{sorted(unknown)[0]}", "unknown field")
    return out


def parse_scene_dict(doc: dict) -> SceneConfig:
    if not isinstance(doc, dict):
        raise SchemaError("scene", "top level must be an object")
    kind = doc.get("scene_kind")
    if kind not in SCENE_KINDS:
        raise SchemaError("scene_kind", f"must be one of {SCENE_KINDS}")
    mu = _float_field(doc, "mu", "scene", default=1.0)
    if not 0.0 <= mu <= 1.0:
        raise SchemaError("mu", "must lie in [0, 1]")
    t_max = _float_field(doc, "t_max", "scene", minimum=0.0)
    integrator = _normalize_integrator(doc.get("integrator", {}))

    raw_params = doc.get("params", {})
    raw_state = doc.get("initial_state", {})
    if not isinstance(raw_state, dict):
        raise SchemaError("initial_state", "expected an object")

    if kind == KIND_GENERIC:
        params = raw_params
        # full structural validation happens here; surfaces rank/nesting issues
        sys = generic_system_from_config(params, path="params")
        state = {
            "x": _vector_field(raw_state, "x", "initial_state", sys.config_dim),
            "v": _vector_field(raw_state, "v", "initial_state", sys.n),
        }
    else:
        params = {
            "mass": _float_field(raw_params, "mass", "params", default=1.0,
                                 minimum=0.0, strict_min=True),
            "inertia": _float_field(raw_params, "inertia", "params", default=0.4,
                                    minimum=0.0, strict_min=True),
            "radius": _float_field(raw_params, "radius", "params", default=1.0,
                                   minimum=0.0, strict_min=True),
            "gravity": _float_field(raw_params, "gravity", "params", default=9.81,
                                    minimum=0.0),
        }
        if kind == KIND_BALL_FLOOR:
            state = {
                "position": _vector_field(raw_state, "position", "initial_state", 3),
                "quaternion": _vector_field(raw_state, "quaternion",
                                            "initial_state", 4, default=[1, 0, 0, 0]),
                "velocity": _vector_field(raw_state, "velocity", "initial_state", 3),
                "omega": _vector_field(raw_state, "omega", "initial_state", 3,
                                       default=[0, 0, 0]),
            }
        else:
            state = {
                "position": _vector_field(raw_state, "position", "initial_state", 2),
                "quaternion": _vector_field(raw_state, "quaternion",
                                            "initial_state", 4, default=[1, 0, 0, 0]),
            }
            if "reduced" in raw_state:
                red = _vector_field(raw_state, "reduced", "initial_state", 3)
                p = BallParams(**params)
                state["velocity"] = list(rolling_velocity_completion(
                    p, ReducedWallState(*red)))
            else:
                state["velocity"] = _vector_field(raw_state, "velocity",
                                                  "initial_state", 5)

    return SceneConfig(scene_kind=kind, params=params, initial_state=state,
                       mu=mu, integrator=integrator, t_max=t_max)


def parse_scene(path) -> SceneConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("scene", f"invalid JSON: {exc}") from None
    return parse_scene_dict(doc)


def emit_scene(cfg: SceneConfig, path=None) -> dict:
    doc = asdict(cfg)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return doc


def build_system(cfg: SceneConfig):
    """Instantiate (MechanicalSystem, initial FlowState) from a config."""
    if cfg.scene_kind == KIND_GENERIC:
        sys = generic_system_from_config(cfg.params, path="params")
        x0 = np.array(cfg.initial_state["x"])
        v0 = np.array(cfg.initial_state["v"])
    else:
        p = BallParams(**cfg.params)
        st = cfg.initial_state
        if cfg.scene_kind == KIND_BALL_FLOOR:
            sys = build_ball_floor_scene(p)
            x0 = np.concatenate([st["position"], st["quaternion"]])
            v0 = np.concatenate([st["velocity"], st["omega"]])
        else:
            sys = build_ball_wall_scene(p)
            x0 = np.concatenate([st["position"], st["quaternion"]])
            v0 = np.array(st["velocity"])
    return sys, FlowState(0.0, x0, v0)


def make_settings(cfg: SceneConfig) -> SimulationSettings:
    it = cfg.integrator
    return SimulationSettings(
        dt=it["dt"], mu=cfg.mu, event_tol=it["event_tol"],
        graze_tol=it["graze_tol"], max_events=it["max_events"],
        min_flight=it["min_flight"],
    )


# ---------------------------------------------------------------------------
# tables


def _fmt(x):
    return format(float(x), ".17g")


def _ball_row(sys, t, x, v):
    if sys.kind == KIND_BALL_FLOOR:
        pos = x[0:3]
        quat = x[3:7]
        vel = v[0:3]
        omg = v[3:6]
    else:
        pos = np.array([x[0], x[1], sys.params.radius])
        quat = x[2:6]
        vel = np.array([v[0], v[1], 0.0])
        omg = v[2:5]
    e = energy(sys, FlowState(t, x, v))
    return [t, *pos, *quat, *vel, *omg, e]


def write_trajectory_table(traj: Trajectory, path):
    sys = traj.system
    if sys.kind == KIND_GENERIC:
        header = (["t"] + [f"x_{i+1}" for i in range(sys.config_dim)]
                  + [f"v_{i+1}" for i in range(sys.n)] + ["energy"])
        rows = (
            [t, *x, *v, energy(sys, FlowState(t, x, v))]
            for t, x, v in zip(traj.times, traj.xs, traj.vs)
        )
    else:
        header = ["t", "x_S", "y_S", "z_S", "q_w", "q_x", "q_y", "q_z",
                  "v_x", "v_y", "v_z", "w_x", "w_y", "w_z", "energy"]
        rows = (_ball_row(sys, t, x, v)
                for t, x, v in zip(traj.times, traj.xs, traj.vs))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def write_events_table(traj: Trajectory, path):
    n = traj.system.n
    header = (["tau"] + [f"v_minus_{i+1}" for i in range(n)]
              + [f"v_plus_{i+1}" for i in range(n)]
              + ["T_minus", "T_plus", "guard_rate", "mu"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for ev in traj.events:
            row = [ev.tau, *ev.v_minus, *ev.v_plus,
                   ev.t_minus, ev.t_plus, ev.guard_rate, traj.mu]
            fh.write(",".join(_fmt(c) for c in row) + "\n")

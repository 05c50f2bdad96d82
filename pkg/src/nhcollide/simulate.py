"""Event-driven hybrid simulation: integrate the constrained flow, locate
guard crossings, apply the impact map, record events, audit invariants.

Smooth arcs of constant-field systems run through the selected stepping
kernel (compiled or pure Python); systems with configuration-dependent
fields fall back to per-step integration via the dynamics module.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import (
    FlowState,
    IntegratorSettings,
    accel_and_multipliers,
    energy,
    project_velocity,
)
from .errors import BisectionStall
from .geometry import apply_impact, impact_matrix, kernel_basis, kinetic_energy
from .models import KIND_CODES, MechanicalSystem, guard_rate, normalize_config

STATUS_COMPLETED = "completed"
STATUS_ZENO_CAP = "zeno_cap"
STATUS_GRAZING_ABORT = "grazing_abort"
STATUS_ERROR = "error"

MAX_BISECTIONS = 200


@dataclass(frozen=True)
class SimulationSettings:
    dt: float = 1e-3
    mu: float = 1.0
    event_tol: float = 1e-12
    graze_tol: float = 1e-8
    max_events: int = 10_000
    min_flight: float = 1e-9
    admissibility_tol: float = 1e-8
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")


@dataclass(frozen=True)
class ImpactEvent:
    tau: float
    x_tau: np.ndarray
    v_minus: np.ndarray
    v_plus: np.ndarray
    t_minus: float          # kinetic energies
    t_plus: float
    guard_rate: float       # dh/dt just before impact


@dataclass
class Trajectory:
    times: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    events: list
    status: str
    message: str = ""
    system: MechanicalSystem = field(default=None, repr=False)
    mu: float = 1.0

    def __len__(self):
        return len(self.times)


class _ArcStepper:
    """Single steps of arbitrary size along the current smooth arc."""

    def __init__(self, sys, settings):
        self.sys = sys
        self.settings = settings
        self.kind = KIND_CODES[sys.kind]
        self.constant = sys.constant_fields
        if self.constant:
            x_any = np.zeros(sys.config_dim)
            self.accel, _ = accel_and_multipliers(sys, x_any, np.zeros(sys.n))
            a_mat = sys.a_at(x_any)
            if a_mat.is_empty:
                self.proj = None
            else:
                g = sys.metric_at(x_any)
                eye = np.eye(sys.n)
                self.proj = np.column_stack(
                    [project_velocity(g, a_mat, eye[:, i]) for i in range(sys.n)]
                )

    def step(self, state: FlowState, h) -> FlowState:
        if h == 0.0:
            return state
        if self.constant:
            x, v = kernels.rk4_step(self.kind, state.x, state.v, self.accel,
                                    self.proj, h)
            return FlowState(state.t + h, x, v)
        from .dynamics import step as dyn_step
        cfg = IntegratorSettings(dt=h, fd_step=self.settings.fd_step)
        return dyn_step(self.sys, state, cfg)

    def run_guarded(self, state: FlowState, n_steps, last_dt):
        """Advance up to n_steps, stopping on guard penetration.

        Returns (xs, vs, crossed); per-step samples.
        """
        sys, st = self.sys, self.settings
        if self.constant:
            c0 = sys.wall.guard_const if sys.wall else 0.0
            cl = sys.wall.guard_linear if sys.wall else None
            return kernels.integrate_guarded(
                self.kind, state.x, state.v, self.accel, self.proj,
                st.dt, n_steps, last_dt, c0, cl, st.event_tol)
        xs, vs = [], []
        crossed = False
        cur = state
        for i in range(n_steps):
            h = last_dt if i == n_steps - 1 else st.dt
            cur = self.step(cur, h)
            xs.append(cur.x)
            vs.append(cur.v)
            if sys.wall is not None and sys.guard(cur.x) < -st.event_tol:
                crossed = True
                break
        return np.array(xs), np.array(vs), crossed


def detect_crossing(sys: MechanicalSystem, s: FlowState, dt,
                    settings: SimulationSettings = None):
    """Take one step of size dt; if the guard changes sign, return a bracket
    (left state, step size) containing the first crossing, else None."""
    settings = settings or SimulationSettings(dt=dt)
    stepper = _ArcStepper(sys, settings)
    after = stepper.step(s, dt)
    if sys.wall is not None and sys.guard(after.x) < -settings.event_tol:
        return (s, dt)
    return None


def refine_crossing(sys: MechanicalSystem, bracket, event_tol,
                    settings: SimulationSettings = None, stepper=None):
    """Bisect the step size until |h| <= event_tol; returns the pre-impact
    state with its velocity limit."""
    left, width = bracket
    settings = settings or SimulationSettings(event_tol=event_tol)
    stepper = stepper or _ArcStepper(sys, settings)
    h_left = sys.guard(left.x)
    if abs(h_left) <= event_tol:
        return left.t, left
    lo, hi = 0.0, width
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        cand = stepper.step(left, mid)
        h = sys.guard(cand.x)
        if abs(h) <= event_tol:
            return cand.t, cand
        if h < 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-18 * max(1.0, width):
            # interval exhausted at double precision; accept the inner edge
            cand = stepper.step(left, lo)
            if abs(sys.guard(cand.x)) <= event_tol:
                return cand.t, cand
            raise BisectionStall(
                f"bracket collapsed at t={left.t + lo} with |h|="
                f"{abs(sys.guard(cand.x)):.3e} > event_tol={event_tol:.1e}"
            )
    raise BisectionStall(f"no convergence after {MAX_BISECTIONS} bisections")


def simulate(sys: MechanicalSystem, initial: FlowState, t_max,
             settings: SimulationSettings) -> Trajectory:
    """Alternate constrained flow and impact events until t_max or a cap."""
    st = settings
    x = normalize_config(sys, initial.x)
    v = project_velocity(sys.metric_at(x), sys.a_at(x), initial.v)
    t0 = float(initial.t)

    if sys.wall is not None:
        h0 = sys.guard(x)
        if h0 < -st.event_tol:
            raise ValueError(f"initial state penetrates the wall (h={h0:.3e})")
        if h0 <= st.event_tol and guard_rate(sys, x, v) <= 0.0:
            raise ValueError("initial state on the wall without outgoing velocity")

    stepper = _ArcStepper(sys, st)
    times = [t0]
    xs = [x.copy()]
    vs = [v.copy()]
    events = []
    status = STATUS_COMPLETED
    message = ""
    cur = FlowState(t0, x, v)
    end_t = t0 + float(t_max)
    last_tau = None

    while end_t - cur.t > 1e-15 * max(1.0, abs(end_t)):
        remaining = end_t - cur.t
        n_steps = max(1, int(math.ceil(remaining / st.dt - 1e-12)))
        last_dt = remaining - (n_steps - 1) * st.dt
        seg_xs, seg_vs, crossed = stepper.run_guarded(cur, n_steps, last_dt)
        k = len(seg_xs)
        keep = k - 1 if crossed else k
        for i in range(keep):
            t_i = end_t if i == n_steps - 1 else cur.t + (i + 1) * st.dt
            times.append(t_i)
            xs.append(seg_xs[i])
            vs.append(seg_vs[i])
        if not crossed:
            break

        # bracket = last kept sample (or segment start) + the crossing step
        if keep > 0:
            left = FlowState(times[-1], seg_xs[keep - 1], seg_vs[keep - 1])
        else:
            left = cur
        width = last_dt if k == n_steps else st.dt

        try:
            tau, pre = refine_crossing(sys, (left, width), st.event_tol,
                                       settings=st, stepper=stepper)
        except BisectionStall as exc:
            status = STATUS_ERROR
            message = str(exc)
            break

        rate = guard_rate(sys, pre.x, pre.v)
        if rate > -st.graze_tol:
            # Theorem-4.2-style transversality fails: abort, never reflect
            status = STATUS_GRAZING_ABORT
            message = f"|dh/dt| = {abs(rate):.3e} <= graze_tol at t={tau}"
            times.append(tau)
            xs.append(pre.x.copy())
            vs.append(pre.v.copy())
            break

        g = sys.metric_at(pre.x)
        a_mat = sys.a_at(pre.x)
        b_mat = sys.wall.b_at(pre.x)
        r = impact_matrix(g, a_mat, b_mat, st.mu)
        v_plus = apply_impact(r, pre.v, a_mat, tol=st.admissibility_tol)
        t_minus = kinetic_energy(g, pre.v)
        t_plus = kinetic_energy(g, v_plus)
        events.append(ImpactEvent(tau, pre.x.copy(), pre.v.copy(), v_plus,
                                  t_minus, t_plus, rate))
        times.append(tau)
        xs.append(pre.x.copy())
        vs.append(v_plus.copy())

        if last_tau is not None and tau - last_tau < st.min_flight:
            status = STATUS_ZENO_CAP
            message = f"inter-event flight time {tau - last_tau:.3e} below cap"
            break
        last_tau = tau
        if len(events) >= st.max_events:
            status = STATUS_ZENO_CAP
            message = f"event cap {st.max_events} reached"
            break

        rate_plus = guard_rate(sys, pre.x, v_plus)
        if rate_plus < -st.graze_tol:
            status = STATUS_ERROR
            message = "post-impact velocity points into the wall"
            break
        if rate_plus <= st.graze_tol:
            status = STATUS_ZENO_CAP
            message = "non-separating contact (post-impact guard rate ~ 0)"
            break
        cur = FlowState(tau, pre.x, v_plus)

    return Trajectory(np.array(times), np.array(xs), np.array(vs), events,
                      status, message, system=sys, mu=st.mu)


@dataclass
class AuditReport:
    """Per-event and per-arc invariant residuals of a finished trajectory."""

    event_energy_errors: np.ndarray      # mu=1: |T+ - T-|/T-; mu<1: (T+ - T-)+
    orthogonality_residuals: np.ndarray  # |Z_B^T G (v+ - v-)|_max per event
    max_constraint_drift: float          # max |A(x) v|_max over samples
    max_arc_energy_drift: float          # relative, within smooth arcs
    n_samples: int = 0

    @property
    def n_events(self):
        return len(self.event_energy_errors)

    def summary(self):
        if self.n_samples == 0:
            return "audit: empty trajectory"
        return (
            f"audit: events={self.n_events} "
            f"max_event_energy_err={max(self.event_energy_errors, default=0.0):.3e} "
            f"max_orthogonality={max(self.orthogonality_residuals, default=0.0):.3e} "
            f"max_constraint_drift={self.max_constraint_drift:.3e} "
            f"max_arc_energy_drift={self.max_arc_energy_drift:.3e}"
        )


def audit(traj: Trajectory) -> AuditReport:
    """Recompute the collision-hypothesis invariants along a trajectory."""
    sys = traj.system
    if sys is None or len(traj) == 0:
        return AuditReport(np.zeros(0), np.zeros(0), 0.0, 0.0, 0)

    energy_errors = []
    ortho = []
    for ev in traj.events:
        if traj.mu == 1.0:
            denom = max(ev.t_minus, 1e-300)
            energy_errors.append(abs(ev.t_plus - ev.t_minus) / denom)
        else:
            energy_errors.append(max(ev.t_plus - ev.t_minus, 0.0))
        g = sys.metric_at(ev.x_tau)
        z = kernel_basis(sys.wall.b_at(ev.x_tau)).cols
        jump = ev.v_plus - ev.v_minus
        ortho.append(float(np.abs(z.T @ g.entries @ jump).max()) if z.size else 0.0)

    drift = 0.0
    for x, v in zip(traj.xs, traj.vs):
        a_mat = sys.a_at(x)
        if not a_mat.is_empty:
            drift = max(drift, float(np.abs(a_mat.entries @ v).max()))

    # split samples into smooth arcs at event times
    arc_drift = 0.0
    event_times = [ev.tau for ev in traj.events]
    boundaries = np.searchsorted(traj.times, event_times)
    starts = [0] + [int(b) + 1 for b in boundaries]
    stops = [int(b) + 1 for b in boundaries] + [len(traj)]
    for lo, hi in zip(starts, stops):
        if hi - lo < 2:
            continue
        es = [energy(sys, FlowState(traj.times[i], traj.xs[i], traj.vs[i]))
              for i in range(lo, hi)]
        ref = max(abs(es[0]), 1e-300)
        arc_drift = max(arc_drift, (max(es) - min(es)) / ref)

    return AuditReport(np.array(energy_errors), np.array(ortho), drift,
                       arc_drift, len(traj))

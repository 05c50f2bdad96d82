"""Scene-level invariant suite backing the `validate` CLI command."""

from dataclasses import dataclass

import numpy as np

from .geometry import (
    apply_impact,
    g_projector,
    impact_matrix,
    kernel_basis,
    projector_from_kernel,
    validate_nesting,
)
from .models import (
    KIND_BALL_FLOOR,
    KIND_BALL_WALL,
    BallParams,
    ReducedWallState,
    ball_floor_impact_closed_form,
    ball_wall_impact_closed_form,
    rolling_velocity_completion,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tol: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: residual {self.residual:.3e} (tol {self.tol:.1e})"


def _res(name, residual, tol):
    return CheckResult(name, bool(residual <= tol), float(residual), tol)


def run_scene_checks(sys, x0, mu, rng_seed=0):
    """Projector/nesting/impact invariants plus closed-form oracles for the
    built-in scenes.  Returns a list of CheckResult."""
    results = []
    g = sys.metric_at(x0)
    a = sys.a_at(x0)
    if sys.wall is None:
        return results
    b = sys.wall.b_at(x0)

    report = validate_nesting(a, b)
    results.append(_res("nesting ker B in ker A", report.residual,
                        report.tol * max(np.abs(a.entries).max(initial=0.0), 1.0)))

    p = g_projector(g, b).entries
    scale = max(1.0, np.abs(p).max())
    results.append(_res("projector idempotent", np.abs(p @ p - p).max() / scale, 1e-10))
    gp = g.entries @ p
    results.append(_res("projector G-self-adjoint",
                        np.abs(gp - gp.T).max() / max(1.0, np.abs(gp).max()), 1e-10))
    p_oracle = projector_from_kernel(g, kernel_basis(b))
    results.append(_res("projector oracle agreement",
                        np.abs(p - p_oracle).max() / scale, 1e-10))
    if not a.is_empty:
        results.append(_res("A P = A",
                            np.abs(a.entries @ p - a.entries).max()
                            / max(1.0, np.abs(a.entries).max()), 1e-9))

    r = impact_matrix(g, a, b, mu)
    z = kernel_basis(b).cols
    if z.size:
        results.append(_res("R identity on ker B",
                            np.abs(r.entries @ z - z).max(), 1e-10))
    if mu == 1.0:
        results.append(_res("R involution (mu=1)",
                            np.abs(r.entries @ r.entries - np.eye(sys.n)).max(),
                            1e-10))

    # the wall-scene closed form is the elastic one
    if sys.kind == KIND_BALL_FLOOR or (sys.kind == KIND_BALL_WALL and mu == 1.0):
        results.append(_closed_form_check(sys, r, mu, rng_seed))
    return results


def _closed_form_check(sys, r, mu, rng_seed, n_cases=100):
    rng = np.random.default_rng(rng_seed)
    p: BallParams = sys.params
    worst = 0.0
    for _ in range(n_cases):
        if sys.kind == KIND_BALL_FLOOR:
            v = rng.standard_normal(6)
            vp = apply_impact(r, v)
            vs, om = ball_floor_impact_closed_form(p, v[:3], v[3:], mu)
            worst = max(worst, np.abs(vp - np.concatenate([vs, om])).max())
        else:
            red = ReducedWallState(*rng.standard_normal(3))
            v = rolling_velocity_completion(p, red)
            vp = apply_impact(r, v)
            out = ball_wall_impact_closed_form(p, red)
            expect = rolling_velocity_completion(p, out)
            worst = max(worst, np.abs(vp - expect).max())
    name = "closed-form vs generic impact map"
    return _res(name, worst, 1e-10)

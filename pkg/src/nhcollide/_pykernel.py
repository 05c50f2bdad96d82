"""Pure-Python stepping kernel (fallback for the compiled extension).

Handles the constant-acceleration smooth arcs of constant-field systems:
classical 4-stage explicit stepping of (config, velocity) with optional
post-step velocity projection and affine guard monitoring.  Kind codes:
0 = generic chart (xdot = v), 1 = ball over floor (pos3 + quat4),
2 = ball at wall (pos2 + quat4).
"""

import math

import numpy as np

BACKEND = "python"


def _xdot(kind, x, v, out):
    if kind == 0:
        out[:] = v
        return
    if kind == 1:
        pos, qo, wo = 3, 3, 3
    else:
        pos, qo, wo = 2, 2, 2
    out[:pos] = v[:pos]
    qw, qx, qy, qz = x[pos], x[pos + 1], x[pos + 2], x[pos + 3]
    w1, w2, w3 = v[wo], v[wo + 1], v[wo + 2]
    # 1/2 q * (0, w)
    out[pos] = 0.5 * (-qx * w1 - qy * w2 - qz * w3)
    out[pos + 1] = 0.5 * (qw * w1 + qy * w3 - qz * w2)
    out[pos + 2] = 0.5 * (qw * w2 - qx * w3 + qz * w1)
    out[pos + 3] = 0.5 * (qw * w3 + qx * w2 - qy * w1)


def rk4_step(kind, x, v, a, proj, h):
    """One step of size h with constant acceleration a; returns (x', v')."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    cd = x.shape[0]
    k1 = np.empty(cd)
    k2 = np.empty(cd)
    k3 = np.empty(cd)
    k4 = np.empty(cd)
    v_half = v + 0.5 * h * a
    v_full = v + h * a
    _xdot(kind, x, v, k1)
    _xdot(kind, x + 0.5 * h * k1, v_half, k2)
    _xdot(kind, x + 0.5 * h * k2, v_half, k3)
    _xdot(kind, x + h * k3, v_full, k4)
    x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if kind != 0:
        qs = 3 if kind == 1 else 2
        nrm = math.sqrt(float(np.dot(x_new[qs:qs + 4], x_new[qs:qs + 4])))
        x_new[qs:qs + 4] /= nrm
    v_new = v_full if proj is None else proj @ v_full
    return x_new, v_new


def integrate_guarded(kind, x, v, a, proj, dt, n_steps, last_dt,
                      guard_const, guard_linear, event_tol):
    """Step up to n_steps times (the final step has size last_dt), stopping
    after the first step whose endpoint penetrates the guard beyond event_tol.

    Returns (xs, vs, crossed): per-step samples and whether the last sample
    lies beyond the wall.
    """
    x = np.asarray(x, dtype=float).copy()
    v = np.asarray(v, dtype=float).copy()
    xs = np.empty((n_steps, x.shape[0]))
    vs = np.empty((n_steps, v.shape[0]))
    crossed = False
    k = 0
    for i in range(n_steps):
        h = last_dt if i == n_steps - 1 else dt
        x, v = rk4_step(kind, x, v, a, proj, h)
        xs[k] = x
        vs[k] = v
        k += 1
        if guard_linear is not None:
            g = guard_const + float(guard_linear @ x)
            if g < -event_tol:
                crossed = True
                break
    return xs[:k], vs[:k], crossed

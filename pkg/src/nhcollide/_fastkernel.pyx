# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepping kernel: same contract as _pykernel.

Constant-acceleration 4-stage stepping with optional velocity projection and
affine guard monitoring, for configuration dimensions up to 32.
"""

from libc.math cimport sqrt

import numpy as np

BACKEND = "cython"

DEF MAXD = 32


cdef void c_xdot(int kind, double* x, double* v, int cd, double* out) noexcept nogil:
    cdef int i, pos
    cdef double qw, qx, qy, qz, w1, w2, w3
    if kind == 0:
        for i in range(cd):
            out[i] = v[i]
        return
    pos = 3 if kind == 1 else 2
    for i in range(pos):
        out[i] = v[i]
    qw = x[pos]; qx = x[pos + 1]; qy = x[pos + 2]; qz = x[pos + 3]
    w1 = v[pos]; w2 = v[pos + 1]; w3 = v[pos + 2]
    out[pos]     = 0.5 * (-qx * w1 - qy * w2 - qz * w3)
    out[pos + 1] = 0.5 * ( qw * w1 + qy * w3 - qz * w2)
    out[pos + 2] = 0.5 * ( qw * w2 - qx * w3 + qz * w1)
    out[pos + 3] = 0.5 * ( qw * w3 + qx * w2 - qy * w1)


cdef void c_rk4(int kind, double* x, double* v, double* a,
                double* proj, bint has_proj, int cd, int n, double h) noexcept nogil:
    cdef double k1[MAXD]
    cdef double k2[MAXD]
    cdef double k3[MAXD]
    cdef double k4[MAXD]
    cdef double xt[MAXD]
    cdef double vh[MAXD]
    cdef double vf[MAXD]
    cdef double vp[MAXD]
    cdef int i, j, qs
    cdef double nrm, acc
    for i in range(n):
        vh[i] = v[i] + 0.5 * h * a[i]
        vf[i] = v[i] + h * a[i]
    c_xdot(kind, x, v, cd, k1)
    for i in range(cd):
        xt[i] = x[i] + 0.5 * h * k1[i]
    c_xdot(kind, xt, vh, cd, k2)
    for i in range(cd):
        xt[i] = x[i] + 0.5 * h * k2[i]
    c_xdot(kind, xt, vh, cd, k3)
    for i in range(cd):
        xt[i] = x[i] + h * k3[i]
    c_xdot(kind, xt, vf, cd, k4)
    for i in range(cd):
        x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    if kind != 0:
        qs = 3 if kind == 1 else 2
        nrm = sqrt(x[qs] * x[qs] + x[qs + 1] * x[qs + 1]
                   + x[qs + 2] * x[qs + 2] + x[qs + 3] * x[qs + 3])
        for i in range(4):
            x[qs + i] = x[qs + i] / nrm
    if has_proj:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += proj[i * n + j] * vf[j]
            vp[i] = acc
        for i in range(n):
            v[i] = vp[i]
    else:
        for i in range(n):
            v[i] = vf[i]


def rk4_step(int kind, x, v, a, proj, double h):
    """One step of size h with constant acceleration a; returns (x', v')."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).copy()
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64).copy()
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef int cd = xv.shape[0]
    cdef int n = vv.shape[0]
    if cd > MAXD or n > MAXD:
        raise ValueError("state dimension exceeds kernel limit")
    cdef double[:, ::1] pv
    cdef bint has_proj = proj is not None
    if has_proj:
        pv = np.ascontiguousarray(proj, dtype=np.float64)
        c_rk4(kind, &xv[0], &vv[0], &av[0], &pv[0, 0], True, cd, n, h)
    else:
        c_rk4(kind, &xv[0], &vv[0], &av[0], NULL, False, cd, n, h)
    return np.asarray(xv), np.asarray(vv)


def integrate_guarded(int kind, x, v, a, proj, double dt, long n_steps,
                      double last_dt, double guard_const, guard_linear,
                      double event_tol):
    """Batch stepping with guard monitoring; see _pykernel.integrate_guarded."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).copy()
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64).copy()
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef int cd = xv.shape[0]
    cdef int n = vv.shape[0]
    if cd > MAXD or n > MAXD:
        raise ValueError("state dimension exceeds kernel limit")
    cdef bint has_proj = proj is not None
    cdef double[:, ::1] pv
    cdef double* pptr = NULL
    if has_proj:
        pv = np.ascontiguousarray(proj, dtype=np.float64)
        pptr = &pv[0, 0]
    cdef bint has_guard = guard_linear is not None
    cdef double[::1] gl
    if has_guard:
        gl = np.ascontiguousarray(guard_linear, dtype=np.float64)
    xs_arr = np.empty((n_steps, cd))
    vs_arr = np.empty((n_steps, n))
    cdef double[:, ::1] xs = xs_arr
    cdef double[:, ::1] vs = vs_arr
    cdef long i, k = 0
    cdef int j
    cdef double h, g
    cdef bint crossed = False
    with nogil:
        for i in range(n_steps):
            h = last_dt if i == n_steps - 1 else dt
            c_rk4(kind, &xv[0], &vv[0], &av[0], pptr, has_proj, cd, n, h)
            for j in range(cd):
                xs[k, j] = xv[j]
            for j in range(n):
                vs[k, j] = vv[j]
            k += 1
            if has_guard:
                g = guard_const
                for j in range(cd):
                    g += gl[j] * xv[j]
                if g < -event_tol:
                    crossed = True
                    break
    return xs_arr[:k], vs_arr[:k], crossed

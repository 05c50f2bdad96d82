"""Minimal unit-quaternion helpers for rigid-body orientation.

Convention: q = (w, x, y, z); orientation evolves by q' = 1/2 q * (0, omega).
"""

import numpy as np


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_derivative(q, omega):
    """dq/dt = 1/2 q * (0, omega)."""
    return 0.5 * quat_mul(q, np.array([0.0, omega[0], omega[1], omega[2]]))


def quat_normalize(q):
    return np.asarray(q, dtype=float) / np.linalg.norm(q)

#!/usr/bin/env python3
"""Time the compiled stepping kernel against the pure-Python twin.

Runs the guarded integrator over a long free-fall arc of the ball-floor
scene and a generic linear system, and reports steps/second for each
available backend.

Usage: python benchmark_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from nhcollide import _pykernel
from nhcollide.models import KIND_CODES

try:
    from nhcollide import _fastkernel
except ImportError:
    _fastkernel = None


def bench_case(impl, kind, x, v, accel, steps, dt):
    guard_lin = None
    t0 = time.perf_counter()
    impl.integrate_guarded(kind, x, v, accel, None, dt, steps, dt,
                           0.0, guard_lin, 1e-12)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=100_000)
    args = parser.parse_args()

    cases = {
        "ball_floor (n=6, quaternion)": (
            KIND_CODES["ball_floor"],
            np.array([0.0, 0, 100.0, 1, 0, 0, 0]),
            np.array([0.1, -0.2, 0.0, 0.3, 0.2, 0.1]),
            np.array([0.0, 0, -9.81, 0, 0, 0]),
        ),
        "generic (n=12)": (
            KIND_CODES["generic"],
            np.zeros(12),
            np.ones(12) * 0.1,
            np.linspace(-1, 1, 12),
        ),
    }
    impls = [("python", _pykernel)]
    if _fastkernel is not None:
        impls.append(("cython", _fastkernel))
    else:
        print("compiled kernel not available; timing the Python backend only")

    dt = 1e-5  # small enough that the floor guard never trips
    for label, (kind, x, v, accel) in cases.items():
        print(f"\n{label}, {args.steps} RK4 steps:")
        base = None
        for name, impl in impls:
            elapsed = bench_case(impl, kind, x, v, accel, args.steps, dt)
            rate = args.steps / elapsed
            note = ""
            if base is None:
                base = elapsed
            else:
                note = f"  ({base / elapsed:.1f}x vs python)"
            print(f"  {name:7s} {elapsed:8.3f} s   {rate:12.0f} steps/s{note}")


if __name__ == "__main__":
    main()

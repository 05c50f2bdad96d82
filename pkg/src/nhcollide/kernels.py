"""Stepping-kernel backend selection: compiled extension if available,
pure-Python fallback otherwise.  Both expose rk4_step and integrate_guarded
with identical semantics."""

try:
    from . import _fastkernel as _impl
except ImportError:          # extension not built on this platform
    from . import _pykernel as _impl

BACKEND = _impl.BACKEND
rk4_step = _impl.rk4_step
integrate_guarded = _impl.integrate_guarded

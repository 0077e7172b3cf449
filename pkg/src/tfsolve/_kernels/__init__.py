"""Integrator backend selection.

The compiled Cython kernel is used when the extension built; otherwise the
pure-Python implementation (same algorithm, same results, slower) takes
over.  ``BACKEND`` records which one is active.
"""
from . import ode_python

try:  # pragma: no cover - depends on the build environment
    from . import _ode_cy as _impl
    BACKEND = "cython"
except ImportError:  # pragma: no cover
    _impl = ode_python
    BACKEND = "python"

integrate = _impl.integrate

REACHED_END = ode_python.REACHED_END
HIT_ZERO = ode_python.HIT_ZERO
TURNED_UP = ode_python.TURNED_UP
DECAYED = ode_python.DECAYED
STEP_UNDERFLOW = ode_python.STEP_UNDERFLOW

__all__ = ["integrate", "BACKEND", "ode_python", "REACHED_END", "HIT_ZERO",
           "TURNED_UP", "DECAYED", "STEP_UNDERFLOW"]

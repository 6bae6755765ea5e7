"""Backend dispatch for the Bloch-equation integrators.

``BLOCH_REPHASE_BACKEND`` selects ``numba`` (default when importable) or
``numpy``.  ``BLOCH_REPHASE_THREADS`` caps the numba worker count.
"""

import os

import numpy as np

from ..errors import StiffnessError
from . import numpy_backend
from ._jit import BACKEND_ENV, HAVE_NUMBA, THREADS_ENV
from .layout import MODE_LAB, MODE_ROTATING, pack_timeline

__all__ = [
    "MODE_LAB",
    "MODE_ROTATING",
    "available_backends",
    "get_backend",
    "integrate_batch",
    "pack_timeline",
    "set_backend",
]

DEFAULT_MAX_STEPS = 50_000_000

_backend = "numba" if HAVE_NUMBA else "numpy"
if os.environ.get(BACKEND_ENV, "").strip().lower() == "numpy":
    _backend = "numpy"


def available_backends():
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def get_backend():
    return _backend


def set_backend(name):
    """Switch backend at runtime; returns the previous one."""
    global _backend
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev, _backend = _backend, name
    return prev


def _apply_thread_cap():
    cap = os.environ.get(THREADS_ENV)
    if not cap:
        return
    import numba

    numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def integrate_batch(segs, data, mode, dz, omega_ref, relax, y_init, tol, sample_times, max_steps=DEFAULT_MAX_STEPS):
    """Integrate the Bloch equations for every class.

    Returns ``(finals[n,3], samples[n,ns,3], steps[n])``; raises
    :class:`StiffnessError` if any class fails to advance.
    """
    dz = np.ascontiguousarray(dz, dtype=float)
    y_init = np.ascontiguousarray(np.broadcast_to(y_init, (dz.size, 3)), dtype=float)
    sample_times = np.ascontiguousarray(np.sort(np.asarray(sample_times, dtype=float)))
    relax = np.asarray(relax, dtype=float)
    if _backend == "numba":
        from . import numba_backend

        _apply_thread_cap()
        finals, samples, status, steps = numba_backend.integrate_batch(
            segs, data, int(mode), dz, float(omega_ref), relax, y_init, float(tol), sample_times, int(max_steps)
        )
    else:
        finals, samples, status, steps = numpy_backend.integrate_batch(
            segs, data, int(mode), dz, float(omega_ref), relax, y_init, float(tol), sample_times, int(max_steps)
        )
    bad = np.flatnonzero(status)
    if bad.size:
        reason = "step-size underflow" if status[bad[0]] == 1 else "step budget exhausted"
        raise StiffnessError(f"integration failed for class {bad[0]}: {reason}")
    return finals, samples, steps

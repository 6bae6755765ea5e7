"""numba shim.

``BLOCH_REPHASE_BACKEND=numpy`` (or a missing numba install) turns ``njit``
into a no-op so every kernel stays importable as plain Python.
"""

import os

BACKEND_ENV = "BLOCH_REPHASE_BACKEND"
THREADS_ENV = "BLOCH_REPHASE_THREADS"

HAVE_NUMBA = False
if os.environ.get(BACKEND_ENV, "numba").strip().lower() != "numpy":
    try:
        import numba

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        HAVE_NUMBA = False


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


if HAVE_NUMBA:
    prange = numba.prange
else:
    prange = range


def python_version(fn):
    """Underlying Python function of a (possibly) jitted kernel."""
    return getattr(fn, "py_func", fn)

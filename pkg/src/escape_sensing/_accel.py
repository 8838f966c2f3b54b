"""Numba shim.

Set ESG_DISABLE_NUMBA=1 to run every kernel through its pure numpy/python
fallback. The flag is read once at import time.
"""
import os

_disabled = os.environ.get("ESG_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
    HAVE_NUMBA = True
except ImportError:
    _numba = None
    HAVE_NUMBA = False


def njit(fn):
    if HAVE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend():
    return "numba" if HAVE_NUMBA else "numpy"

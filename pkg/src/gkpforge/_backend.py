"""Select the kernel backend.

Set ``GKPFORGE_BACKEND=numpy`` to force the pure-numpy kernels; the default
uses numba when it can be imported.
"""
import os
import warnings

try:
    import numba
except ImportError:  # numba is the optional "fast" extra
    numba = None

_requested = os.environ.get("GKPFORGE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    warnings.warn(f"unknown GKPFORGE_BACKEND={_requested!r}, using numpy")
    _requested = "numpy"

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    kwargs.setdefault("cache", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def thread_cap() -> int:
    """Worker cap for sweeps, from ``GKPFORGE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GKPFORGE_THREADS", "1")))
    except ValueError:
        return 1

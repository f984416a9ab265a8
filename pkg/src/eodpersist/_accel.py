"""Backend selection for the numeric kernels.

Kernels are compiled with numba when it is importable, unless the
``EODPERSIST_NO_NUMBA`` environment variable is set to a truthy value,
in which case the pure-numpy twins in :mod:`eodpersist.kernels` are used.
The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("EODPERSIST_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not NUMBA_DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise a no-op decorator."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn
    if args and callable(args[0]):
        return args[0]
    return wrap


if HAS_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n):
    """Bound the numba worker pool. A no-op on the numpy backend."""
    if n is None or not HAS_NUMBA:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)

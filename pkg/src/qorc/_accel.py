"""Numba switch for the hot kernels.

Set ``QORC_DISABLE_NUMBA=1`` before importing :mod:`qorc` to run the pure-numpy
code paths instead of the compiled ones. Both paths produce the same results
to floating point round-off; ``benchmarks/bench_kernels.py`` compares them.
"""

import os

_FLAG = os.environ.get("QORC_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode when numba is enabled."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)

"""Numba acceleration plumbing.

Hot kernels are written twice: a scalar-loop version compiled with
``numba.njit`` and a vectorized numpy fallback. Which one runs is decided
once at import from the ``SOC_CASCADE_NUMBA`` environment variable
(anything but "0" enables numba when it is importable). The fallback is
always importable so the package works on interpreters without numba.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SOC_CASCADE_NUMBA", "1") != "0"

NJIT_OPTS = {"cache": True, "nogil": True}


def njit(func):
    """Compile ``func`` with the project-wide numba options."""
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    return numba.njit(**NJIT_OPTS)(func)


def worker_count() -> int:
    """Worker cap for run-level parallelism, from SOC_CASCADE_THREADS."""
    raw = os.environ.get("SOC_CASCADE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(8, os.cpu_count() or 1)
    return n

"""Optional numba acceleration.

Kernels are written twice: a vectorized numpy version and a loop version
compiled with numba. ``PLATEROD_DISABLE_NUMBA=1`` (or a missing numba)
selects the numpy path everywhere.
"""
from __future__ import annotations

import os

# the default TBB layer warns when its runtime is too old; workqueue is
# always available and is deterministic for the reductions used here
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

_disabled = os.environ.get("PLATEROD_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def deco(fn):
            return fn

        return deco


def use_numba() -> bool:
    """True when the compiled kernels are active."""
    return HAVE_NUMBA


def set_threads(n: int | None) -> int:
    """Fix the worker count for compiled kernels; returns the count in use."""
    if n is None:
        env = os.environ.get("PLATEROD_THREADS")
        n = int(env) if env else None
    if HAVE_NUMBA:
        if n is not None:
            n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
            numba.set_num_threads(n)
        return int(numba.get_num_threads())
    return 1 if n is None else max(1, int(n))

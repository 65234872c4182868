"""Optional numba compilation of numeric kernels.

Set ``SYMPRUNE_NO_JIT=1`` to run every kernel as plain Python.
"""

import os

try:
    if os.environ.get("SYMPRUNE_NO_JIT", "") not in ("", "0"):
        raise ImportError("JIT disabled by SYMPRUNE_NO_JIT")
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

JIT_ENABLED = numba is not None


def jit(func):
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


def python_version(func):
    """The uncompiled function behind ``func`` (itself when not compiled)."""
    return getattr(func, "py_func", func)

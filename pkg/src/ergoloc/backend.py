"""Numerical backend selection.

Hot kernels (the conic-solver loop and the unitary-ascent loop) are written
once in a numba-compilable subset of numpy and compiled with @njit when the
numba backend is active.  Set ERGOLOC_BACKEND=numpy to force the pure-numpy
interpretation of the same code, ERGOLOC_BACKEND=numba to require the jit.
Default: numba when importable, numpy otherwise.
"""

from __future__ import annotations

import os

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAS_NUMBA = False

_env = os.environ.get("ERGOLOC_BACKEND", "").strip().lower()
if _env in ("numpy", "python"):
    USE_NUMBA = False
elif _env == "numba":
    if not HAS_NUMBA:
        raise ImportError("ERGOLOC_BACKEND=numba but numba is not installed")
    USE_NUMBA = True
elif _env == "":
    USE_NUMBA = HAS_NUMBA
else:
    raise ValueError(f"unknown ERGOLOC_BACKEND value: {_env!r}")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def compile_kernel(fn):
    """Return the jitted version of ``fn`` under the numba backend, else ``fn``."""
    if USE_NUMBA:
        return njit(cache=True)(fn)
    return fn


def jit_if_available(fn):
    """Jit ``fn`` when numba is importable, regardless of the active backend.

    Used by the benchmark to time both variants in one process.
    """
    if HAS_NUMBA:
        return njit(cache=True)(fn)
    return fn

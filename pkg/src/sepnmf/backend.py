"""Kernel backend selection.

Hot kernels are written once in njit-compatible style and compiled with
numba when available. Set SEPNMF_BACKEND=numpy to force the uncompiled
fallback path, SEPNMF_BACKEND=numba to require compilation, or leave it
at auto (default) to use numba when importable.
"""

import os

_CHOICE = os.environ.get("SEPNMF_BACKEND", "auto").strip().lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"SEPNMF_BACKEND must be auto|numba|numpy, got {_CHOICE!r}")

try:
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

if _CHOICE == "numba" and not HAS_NUMBA:
    raise RuntimeError("SEPNMF_BACKEND=numba but numba is not importable")

USE_NUMBA = HAS_NUMBA and _CHOICE != "numpy"


def active_backend() -> str:
    """Name of the backend the kernels run on in this process."""
    return "numba" if USE_NUMBA else "numpy"


def jit(fn):
    """Compile fn with numba on the active backend, else return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def compile_njit(fn):
    """Always-compiled variant, used by the backend benchmark. Requires numba."""
    if not HAS_NUMBA:
        raise RuntimeError("numba is not available")
    return numba.njit(cache=True)(fn)

"""Backend selection for the compiled kernels.

Hot loops are written twice: once as numba ``@njit`` kernels and once as
vectorised numpy code. ``QSTAR_BACKEND=numpy`` in the environment forces the
numpy path; otherwise numba is used when it can be imported.
"""
from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # Skip the TBB probe; the bundled TBB is often too old and warns on every run.
    numba.config.THREADING_LAYER = "omp"

_requested = os.environ.get("QSTAR_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"QSTAR_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

_state = {"backend": "numba" if (_requested == "numba" and numba is not None) else "numpy"}

HAVE_NUMBA = numba is not None


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


prange = range if numba is None else numba.prange


def get_backend() -> str:
    return _state["backend"]


def set_backend(name: str) -> None:
    name = name.strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba backend requested but numba is not installed")
    _state["backend"] = name


def use_numba() -> bool:
    return _state["backend"] == "numba"


def set_threads(n: int | None) -> None:
    """Set the numba worker count; ignored on the numpy backend."""
    if numba is None or n is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)

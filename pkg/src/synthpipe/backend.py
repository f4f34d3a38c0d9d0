"""Raster kernel selection.

Two interchangeable implementations exist: a numba-JIT scalar loop (fast,
default) and a pure-numpy vectorized fallback. The SYNTHPIPE_RASTER
environment variable picks the default ("numba", "numpy", or "auto");
callers may also force a backend per call. Both produce bit-identical
buffers; benchmarks/bench_raster.py compares their speed.
"""

from __future__ import annotations

import importlib.util
import os

ENV_VAR = "SYNTHPIPE_RASTER"
_CHOICES = ("numba", "numpy")
_kernels: dict[str, object] = {}


def numba_available() -> bool:
    return importlib.util.find_spec("numba") is not None


def resolve_backend(choice: str | None = None) -> str:
    """Map an explicit choice / env var / auto-detection to a backend name."""
    name = choice or os.environ.get(ENV_VAR, "auto")
    if name == "auto":
        return "numba" if numba_available() else "numpy"
    if name not in _CHOICES:
        raise ValueError(f"unknown raster backend {name!r}; pick one of {_CHOICES} or 'auto'")
    return name


def get_visibility_kernel(choice: str | None = None):
    """Return (backend_name, kernel) importing the implementation lazily."""
    name = resolve_backend(choice)
    if name not in _kernels:
        if name == "numba":
            from ._raster_numba import visibility_kernel
        else:
            from ._raster_numpy import visibility_kernel
        _kernels[name] = visibility_kernel
    return name, _kernels[name]

"""Backend selection for the hot pixel kernels.

The compiled extension (barkline._kernels) is preferred; a NumPy
implementation (barkline._kernels_py) is the fallback. Both produce
bit-identical results. Set BARKLINE_BACKEND=python to force the fallback,
or BARKLINE_BACKEND=native to require the extension.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

__all__ = ["BACKEND", "available_backends", "convolve3x3", "boundary_rows"]

_native = None
try:
    from . import _kernels as _native  # type: ignore[no-redef]
except ImportError:
    _native = None

_requested = os.environ.get("BARKLINE_BACKEND", "auto").lower()
if _requested == "python":
    _impl = _kernels_py
    BACKEND = "python"
elif _requested == "native":
    if _native is None:
        raise ImportError(
            "BARKLINE_BACKEND=native but the compiled extension is not built")
    _impl = _native
    BACKEND = "native"
else:
    _impl = _native if _native is not None else _kernels_py
    BACKEND = "native" if _native is not None else "python"


def available_backends() -> list[str]:
    return ["python"] + (["native"] if _native is not None else [])


def _module(backend: str | None):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "native":
        if _native is None:
            raise ValueError("native backend is not built")
        return _native
    raise ValueError(f"unknown backend {backend!r}")


def convolve3x3(img: np.ndarray, kernel: np.ndarray,
                backend: str | None = None) -> np.ndarray:
    return _module(backend).convolve3x3(img, kernel)


def boundary_rows(r1: np.ndarray, r2: np.ndarray, threshold: float,
                  backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    return _module(backend).boundary_rows(r1, r2, threshold)

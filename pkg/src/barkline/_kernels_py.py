"""NumPy implementation of the hot pixel kernels.

Fallback backend used when the compiled extension is unavailable; must
produce bit-identical results to barkline._kernels.
"""
from __future__ import annotations

import numpy as np


def convolve3x3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 correlation-style convolution with replicate-edge padding.

    response(x, y) = sum over dx,dy in {-1,0,1} of
        kernel[1+dy, 1+dx] * img(x+dx, y+dy)
    """
    h, w = img.shape
    padded = np.pad(img.astype(np.int32), 1, mode="edge")
    out = np.zeros((h, w), dtype=np.int32)
    for dy in range(3):
        for dx in range(3):
            kv = int(kernel[dy, dx])
            if kv:
                out += kv * padded[dy:dy + h, dx:dx + w]
    return out


def boundary_rows(r1: np.ndarray, r2: np.ndarray,
                  threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-column boundary rows from the two signed Prewitt responses.

    upper[x] = topmost y with r2 > 0 and edge strength > threshold
    lower[x] = bottommost y with r1 > 0 and edge strength > threshold
    -1 where no row in the column qualifies. Strength is compared in
    squared form; threshold must be nonnegative.
    """
    h = r1.shape[0]
    s2 = r1.astype(np.float64) ** 2 + r2.astype(np.float64) ** 2
    strong = s2 > threshold * threshold
    up_cond = strong & (r2 > 0)
    lo_cond = strong & (r1 > 0)
    has_up = up_cond.any(axis=0)
    has_lo = lo_cond.any(axis=0)
    upper = np.where(has_up, up_cond.argmax(axis=0), -1).astype(np.int64)
    lower = np.where(has_lo, h - 1 - lo_cond[::-1].argmax(axis=0), -1).astype(np.int64)
    return upper, lower

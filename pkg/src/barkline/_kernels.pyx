# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pixel kernels: 3x3 convolution and per-column boundary scan.

Must stay bit-identical to barkline._kernels_py (the NumPy fallback).
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def convolve3x3(img, kernel):
    """3x3 convolution with replicate-edge padding; int32 responses."""
    cdef const unsigned char[:, ::1] im = np.ascontiguousarray(img, dtype=np.uint8)
    cdef const int[:, ::1] k = np.ascontiguousarray(kernel, dtype=np.int32)
    cdef Py_ssize_t h = im.shape[0], w = im.shape[1]
    out = np.empty((h, w), dtype=np.int32)
    cdef int[:, ::1] o = out
    cdef Py_ssize_t x, y, dx, dy, sx, sy
    cdef int acc
    for y in range(h):
        for x in range(w):
            acc = 0
            for dy in range(-1, 2):
                sy = y + dy
                if sy < 0:
                    sy = 0
                elif sy >= h:
                    sy = h - 1
                for dx in range(-1, 2):
                    sx = x + dx
                    if sx < 0:
                        sx = 0
                    elif sx >= w:
                        sx = w - 1
                    acc += k[1 + dy, 1 + dx] * im[sy, sx]
            o[y, x] = acc
    return out


def boundary_rows(r1, r2, double threshold):
    """Per-column topmost (r2-positive) and bottommost (r1-positive) strong rows."""
    cdef const int[:, ::1] a = np.ascontiguousarray(r1, dtype=np.int32)
    cdef const int[:, ::1] b = np.ascontiguousarray(r2, dtype=np.int32)
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    upper = np.full(w, -1, dtype=np.int64)
    lower = np.full(w, -1, dtype=np.int64)
    cdef long long[::1] up = upper
    cdef long long[::1] lo = lower
    cdef Py_ssize_t x, y
    cdef double t2 = threshold * threshold
    cdef double v1, v2
    for x in range(w):
        for y in range(h):
            if b[y, x] > 0:
                v1 = a[y, x]
                v2 = b[y, x]
                if v1 * v1 + v2 * v2 > t2:
                    up[x] = y
                    break
        for y in range(h - 1, -1, -1):
            if a[y, x] > 0:
                v1 = a[y, x]
                v2 = b[y, x]
                if v1 * v1 + v2 * v2 > t2:
                    lo[x] = y
                    break
    return upper, lower

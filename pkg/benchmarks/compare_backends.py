#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the NumPy fallback.

Times the two hot kernels (3x3 convolution and per-column boundary-row
scan) on binary band images of increasing size, checks both backends
produce identical results, and prints a speedup table.

Usage: python3 benchmarks/compare_backends.py [--repeats N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from barkline import kernels
from barkline.edgedetect import GY1, GY2


def make_image(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Binary band with wavy boundaries, rendered as a 0/255 grayscale."""
    rng = np.random.default_rng(seed)
    x = np.arange(w)
    upper = h * 0.3 + 3.0 * np.sin(x / 37.0) + rng.normal(0, 0.5, w)
    lower = h * 0.7 + 3.0 * np.cos(x / 53.0) + rng.normal(0, 0.5, w)
    rows = np.arange(h)[:, None]
    return ((rows >= upper) & (rows < lower)).astype(np.uint8) * 255


def time_backend(backend: str, img: np.ndarray, repeats: int) -> tuple[float, tuple]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        r1 = kernels.convolve3x3(img, GY1, backend=backend)
        r2 = kernels.convolve3x3(img, GY2, backend=backend)
        rows = kernels.boundary_rows(r1, r2, 1.0, backend=backend)
        best = min(best, time.perf_counter() - t0)
        result = (r1, r2, rows)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per size (best-of)")
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "native" not in backends:
        print("compiled extension not available; timing python backend only")

    sizes = [(480, 640), (1024, 1280), (2048, 3072)]
    header = f"{'size':>12}  {'python':>10}  {'native':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for h, w in sizes:
        img = make_image(h, w)
        t_py, res_py = time_backend("python", img, args.repeats)
        if "native" in backends:
            t_nat, res_nat = time_backend("native", img, args.repeats)
            for a, b in zip(res_py[:2], res_nat[:2]):
                assert np.array_equal(a, b), "backend responses differ"
            for a, b in zip(res_py[2], res_nat[2]):
                assert np.array_equal(a, b), "backend boundary rows differ"
            print(f"{h}x{w:>7}  {t_py * 1e3:>8.2f}ms  {t_nat * 1e3:>8.2f}ms  "
                  f"{t_py / t_nat:>7.2f}x")
        else:
            print(f"{h}x{w:>7}  {t_py * 1e3:>8.2f}ms  {'n/a':>10}  {'n/a':>8}")
    if "native" in backends:
        print("\nresults bit-identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

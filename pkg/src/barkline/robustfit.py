"""Robust boundary-line fitting: ordinary least squares seeded IRLS with
Tukey weighting.

The loop alternates residual computation, weight computation, and weighted
refitting until both parameter deltas fall below tolerance or the
iteration cap is hit. Deterministic: identical inputs and parameters
produce bitwise-identical results.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LineFit",
    "TukeyParams",
    "FitError",
    "TUKEY_EFFICIENCY_C",
    "MAD_NORMALIZATION",
    "ols_fit",
    "residuals",
    "tukey_weights",
    "weighted_ols_fit",
    "fit_line",
]

# 95%-efficiency threshold constant for the Tukey biweight, applied to the
# normalized MAD scale estimate.
TUKEY_EFFICIENCY_C = 4.685
MAD_NORMALIZATION = 1.4826
_C_FLOOR = 1e-8  # keeps exact-fit residuals (all zero) from zeroing every weight


class FitError(ValueError):
    """Unfittable input: too few points or zero x-variance."""


@dataclass(frozen=True)
class TukeyParams:
    """Configuration for the reweighted fit.

    c_mode "mad" rescales the cutoff each iteration from the normalized
    median absolute deviation of the residuals (c_value is the multiplier);
    "fixed" uses c_value directly, in pixels. weight_variant "biweight" is
    the standard redescending weight; "inverted" selects an alternative
    form that vanishes at zero residual (see tukey_weights).
    """

    c_mode: str = "mad"
    c_value: float = TUKEY_EFFICIENCY_C
    weight_variant: str = "biweight"
    max_iterations: int = 50
    convergence_tol_slope: float = 1e-6
    convergence_tol_intercept: float = 1e-3

    def __post_init__(self):
        if self.c_mode not in ("mad", "fixed"):
            raise ValueError(f"c_mode must be 'mad' or 'fixed', got {self.c_mode!r}")
        if self.c_value <= 0:
            raise ValueError("c_value must be positive")
        if self.weight_variant not in ("biweight", "inverted"):
            raise ValueError(
                f"weight_variant must be 'biweight' or 'inverted', got "
                f"{self.weight_variant!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.convergence_tol_slope <= 0 or self.convergence_tol_intercept <= 0:
            raise ValueError("convergence tolerances must be positive")


@dataclass(frozen=True)
class LineFit:
    """Fitted line y = slope_k * x + intercept_b with IRLS diagnostics."""

    slope_k: float
    intercept_b: float
    n_points: int
    iterations: int
    converged: bool
    final_weights: np.ndarray
    rms_residual: float
    degenerate: bool = False

    def __post_init__(self):
        w = np.ascontiguousarray(self.final_weights, dtype=np.float64)
        w.flags.writeable = False
        object.__setattr__(self, "final_weights", w)

    def y_at(self, x: float) -> float:
        return self.slope_k * x + self.intercept_b

    def to_report(self) -> dict:
        return {
            "k": self.slope_k,
            "b": self.intercept_b,
            "n_points": self.n_points,
            "iterations": self.iterations,
            "converged": self.converged,
            "rms_residual": self.rms_residual,
        }


def _as_xy(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise FitError(f"x/y length mismatch: {len(x)} vs {len(y)}")
    return x, y


def ols_fit(x, y) -> tuple[float, float]:
    """Closed-form least squares line through (x, y).

    k = (N sum(x*y) - sum(x)*sum(y)) / (N sum(x^2) - sum(x)^2)
    b = (sum(y) - k*sum(x)) / N
    """
    x, y = _as_xy(x, y)
    n = len(x)
    if n < 2:
        raise FitError(f"need at least 2 points, got {n}")
    sx = x.sum()
    denom = n * (x * x).sum() - sx * sx
    if denom <= 0:
        raise FitError("zero x-variance (vertical line)")
    k = (n * (x * y).sum() - sx * y.sum()) / denom
    b = (y.sum() - k * sx) / n
    return float(k), float(b)


def residuals(x, y, k: float, b: float) -> np.ndarray:
    """Signed vertical residuals r_i = y_i - (k*x_i + b)."""
    x, y = _as_xy(x, y)
    return y - (k * x + b)


def tukey_weights(r, c: float, variant: str = "biweight") -> np.ndarray:
    """Per-residual weights; omega = 0 wherever |r| >= c.

    variant "biweight": omega = (1 - (r/c)^2)^2 for |r| < c (standard
    redescending form, full weight at zero residual).
    variant "inverted": omega = 1 - (1 - |r|/c)^2 for |r| < c (alternative
    form that instead vanishes at zero residual; kept selectable for
    comparison experiments).
    """
    if c <= 0:
        raise ValueError("threshold c must be positive")
    r = np.asarray(r, dtype=np.float64)
    a = np.abs(r) / c
    if variant == "biweight":
        w = np.square(1.0 - np.square(a))
    elif variant == "inverted":
        w = 1.0 - np.square(1.0 - a)
    else:
        raise ValueError(f"unknown weight variant {variant!r}")
    return np.where(a < 1.0, w, 0.0)


def weighted_ols_fit(x, y, weights) -> tuple[float, float]:
    """Weighted least squares line through (x, y).

    k = sum(w*(x-xbar)*(y-ybar)) / sum(w*(x-xbar)^2), b = ybar - k*xbar,
    with xbar, ybar the weighted means.
    """
    x, y = _as_xy(x, y)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape != x.shape:
        raise FitError("weights length must match points")
    sw = w.sum()
    if sw <= 0:
        raise FitError("all weights zero")
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    dx = x - xbar
    denom = (w * dx * dx).sum()
    if denom <= 0:
        raise FitError("zero weighted x-variance")
    k = (w * dx * (y - ybar)).sum() / denom
    b = ybar - k * xbar
    return float(k), float(b)


def _cutoff(r: np.ndarray, params: TukeyParams) -> float:
    if params.c_mode == "fixed":
        return params.c_value
    # scale from the uncentered MAD: median |r|. Weights are applied to raw
    # residuals, so centering the MAD would let a location-biased seed fit
    # (all inlier residuals sharing a large offset) zero every weight.
    mad = float(np.median(np.abs(r)))
    return max(params.c_value * MAD_NORMALIZATION * mad, _C_FLOOR)


def _weighted_rms(r: np.ndarray, w: np.ndarray) -> float:
    sw = w.sum()
    if sw <= 0:
        return float(np.sqrt(np.mean(r * r)))
    return float(np.sqrt((w * r * r).sum() / sw))


def fit_line(x, y, params: TukeyParams = TukeyParams()) -> LineFit:
    """OLS seed followed by Tukey-reweighted refits until convergence.

    Converged when both |delta k| < convergence_tol_slope and |delta b| <
    convergence_tol_intercept within max_iterations. If an iteration zeroes
    every weight (total outlier rejection), the previous iterate is
    returned with degenerate=True rather than raising: one bad frame must
    not halt the line; the caller rejects the panel downstream.
    """
    x, y = _as_xy(x, y)
    k, b = ols_fit(x, y)
    n = len(x)
    w = np.ones(n)
    iterations = 0
    converged = False
    degenerate = False
    for _ in range(params.max_iterations):
        r = residuals(x, y, k, b)
        c = _cutoff(r, params)
        w_new = tukey_weights(r, c, params.weight_variant)
        try:
            k_new, b_new = weighted_ols_fit(x, y, w_new)
        except FitError:
            degenerate = True
            break
        iterations += 1
        w = w_new
        dk, db = abs(k_new - k), abs(b_new - b)
        k, b = k_new, b_new
        if (dk < params.convergence_tol_slope
                and db < params.convergence_tol_intercept):
            converged = True
            break
    r = residuals(x, y, k, b)
    return LineFit(
        slope_k=k,
        intercept_b=b,
        n_points=n,
        iterations=iterations,
        converged=converged and not degenerate,
        final_weights=w,
        rms_residual=_weighted_rms(r, w),
        degenerate=degenerate,
    )

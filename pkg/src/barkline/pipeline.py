"""Full post-segmentation pipeline for one mask: edge detection, robust
boundary fits, key-data computation.

Every failure mode downstream of file I/O is encoded as a rejected
PanelKeyData so batch processing never stops on a bad frame.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .edgedetect import (Boundary, EdgeDetectError, EdgeDetectParams,
                         EdgePointSet, extract_boundary_points,
                         filter_segments)
from .imagecore import ClassMask
from .keydata import (REASON_FIT_DEGENERATE, CalibrationProfile, PanelKeyData,
                      compute_keydata)
from .robustfit import FitError, LineFit, TukeyParams, fit_line

__all__ = ["PanelAnalysis", "analyze_mask"]


@dataclass(frozen=True)
class PanelAnalysis:
    keydata: PanelKeyData
    upper_fit: LineFit | None = None
    lower_fit: LineFit | None = None
    points: EdgePointSet | None = None
    x_extent: tuple[float, float] | None = None


def _rejected(reason: str, points: EdgePointSet | None = None) -> PanelAnalysis:
    return PanelAnalysis(
        keydata=PanelKeyData(
            cuttable_width_mm=0.0,
            attitude_angle_deg=0.0,
            centerline_offset_mm=0.0,
            selected_channel=None,
            travel_mm=None,
            rejected=True,
            reason=reason,
        ),
        points=points,
    )


def analyze_mask(mask: ClassMask, edge_params: EdgeDetectParams,
                 tukey_params: TukeyParams, cal: CalibrationProfile,
                 timings: dict[str, float] | None = None) -> PanelAnalysis:
    """Run edge detection, boundary fitting, and key-data computation.

    When a timings dict is supplied, per-stage wall times in seconds are
    recorded under keys "edge", "fit", and "keydata".
    """
    t0 = time.perf_counter()
    try:
        points = filter_segments(
            extract_boundary_points(mask, edge_params), edge_params)
    except EdgeDetectError:
        if timings is not None:
            timings["edge"] = time.perf_counter() - t0
            timings["fit"] = 0.0
            timings["keydata"] = 0.0
        return _rejected(REASON_FIT_DEGENERATE)
    t1 = time.perf_counter()

    ux, uy = points.pooled(Boundary.UPPER)
    lx, ly = points.pooled(Boundary.LOWER)
    try:
        if len(ux) < 2 or len(lx) < 2:
            raise FitError("a boundary has fewer than 2 points")
        upper_fit = fit_line(ux, uy, tukey_params)
        lower_fit = fit_line(lx, ly, tukey_params)
    except FitError:
        t2 = time.perf_counter()
        if timings is not None:
            timings["edge"] = t1 - t0
            timings["fit"] = t2 - t1
            timings["keydata"] = 0.0
        return _rejected(REASON_FIT_DEGENERATE, points)
    t2 = time.perf_counter()

    # shared x-extent: intersection of the two boundaries' column ranges
    x_min = float(max(ux.min(), lx.min()))
    x_max = float(min(ux.max(), lx.max()))
    if x_min >= x_max:
        if timings is not None:
            timings["edge"] = t1 - t0
            timings["fit"] = t2 - t1
            timings["keydata"] = 0.0
        return _rejected(REASON_FIT_DEGENERATE, points)

    kd = compute_keydata(upper_fit, lower_fit, (x_min, x_max), cal)
    t3 = time.perf_counter()
    if timings is not None:
        timings["edge"] = t1 - t0
        timings["fit"] = t2 - t1
        timings["keydata"] = t3 - t2
    return PanelAnalysis(
        keydata=kd,
        upper_fit=upper_fit,
        lower_fit=lower_fit,
        points=points,
        x_extent=(x_min, x_max),
    )

"""Boundary edge detection on panel masks.

Vertical-gradient convolution with the 3x3 kernel pair, edge-strength
combination, per-column upper/lower boundary extraction, and removal of
short or discontinuous edge segments.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .imagecore import ClassMask, GrayImage, SignedResponseImage, mask_to_gray

__all__ = [
    "GY1",
    "GY2",
    "Boundary",
    "EdgePoint",
    "EdgeSegment",
    "EdgePointSet",
    "EdgeDetectParams",
    "EdgeDetectError",
    "NoEdgeError",
    "AllSegmentsFilteredError",
    "convolve3x3",
    "edge_strength",
    "extract_boundary_points",
    "filter_segments",
]

# Vertical kernel pair: GY1 responds to light-above/dark-below transitions
# (panel -> background, the lower edge in a y-down frame), GY2 to the
# opposite (the upper edge). GY2 == -GY1; both rows sum to zero.
GY1 = np.array([[1, 1, 1], [0, 0, 0], [-1, -1, -1]], dtype=np.int32)
GY2 = np.array([[-1, -1, -1], [0, 0, 0], [1, 1, 1]], dtype=np.int32)
GY1.flags.writeable = False
GY2.flags.writeable = False


class EdgeDetectError(ValueError):
    """Base class for edge detection failures."""


class NoEdgeError(EdgeDetectError):
    """No qualifying edge responses (e.g. all-panel or all-background mask)."""


class AllSegmentsFilteredError(EdgeDetectError):
    """Every detected segment fell below the length filter; panel unfittable."""


class Boundary(Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class EdgePoint:
    x: int
    y: int


@dataclass(frozen=True)
class EdgeSegment:
    """Run of boundary points, ascending in x, one point per column."""

    xs: np.ndarray  # int64, strictly increasing
    ys: np.ndarray  # int64, same length
    boundary: Boundary

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=np.int64)
        ys = np.ascontiguousarray(self.ys, dtype=np.int64)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs/ys must be 1D arrays of equal length")
        if len(xs) > 1 and not np.all(np.diff(xs) > 0):
            raise ValueError("segment columns must be strictly increasing")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def points(self) -> list[EdgePoint]:
        return [EdgePoint(int(x), int(y)) for x, y in zip(self.xs, self.ys)]


@dataclass(frozen=True)
class EdgePointSet:
    """Detected upper/lower boundary segments for one mask."""

    upper: tuple[EdgeSegment, ...]
    lower: tuple[EdgeSegment, ...]
    source_dims: tuple[int, int]  # (width, height)

    def pooled(self, boundary: Boundary) -> tuple[np.ndarray, np.ndarray]:
        """All points of one boundary pooled across segments, as (xs, ys)."""
        segs = self.upper if boundary is Boundary.UPPER else self.lower
        if not segs:
            return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        xs = np.concatenate([s.xs for s in segs])
        ys = np.concatenate([s.ys for s in segs])
        return xs, ys

    def to_csv(self) -> str:
        """Debug dump: x,y,boundary,segment_id per line."""
        buf = io.StringIO()
        buf.write("x,y,boundary,segment_id\n")
        for segs in (self.upper, self.lower):
            for sid, seg in enumerate(segs):
                for x, y in zip(seg.xs, seg.ys):
                    buf.write(f"{x},{y},{seg.boundary.value},{sid}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class EdgeDetectParams:
    response_threshold: float = 1.0
    min_segment_length: int = 20
    gap_tolerance: int = 2

    def __post_init__(self):
        if self.response_threshold < 0:
            raise ValueError("response_threshold must be nonnegative")
        if self.min_segment_length < 2:
            raise ValueError("min_segment_length must be >= 2")
        if self.gap_tolerance < 1:
            raise ValueError("gap_tolerance must be >= 1")


def convolve3x3(image: GrayImage, kernel: np.ndarray) -> SignedResponseImage:
    """Convolve with a 3x3 kernel, replicate-edge padding, no normalization."""
    if image.height < 3 or image.width < 3:
        raise ValueError(f"image must be at least 3x3, got "
                         f"{image.width}x{image.height}")
    kernel = np.asarray(kernel, dtype=np.int32)
    if kernel.shape != (3, 3):
        raise ValueError(f"kernel must be 3x3, got {kernel.shape}")
    return SignedResponseImage(kernels.convolve3x3(image.data, kernel))


def edge_strength(r1: SignedResponseImage, r2: SignedResponseImage) -> np.ndarray:
    """Combine the two directional responses: sqrt(r1^2 + r2^2) per pixel."""
    if r1.data.shape != r2.data.shape:
        raise ValueError(f"dimension mismatch: {r1.data.shape} vs {r2.data.shape}")
    a = r1.data.astype(np.float64)
    b = r2.data.astype(np.float64)
    return np.sqrt(a * a + b * b)


def _split_segments(xs: np.ndarray, ys: np.ndarray, boundary: Boundary,
                    gap_tolerance: int) -> list[EdgeSegment]:
    if len(xs) == 0:
        return []
    breaks = np.nonzero(np.diff(xs) > gap_tolerance)[0] + 1
    return [EdgeSegment(xi, yi, boundary)
            for xi, yi in zip(np.split(xs, breaks), np.split(ys, breaks))]


def extract_boundary_points(mask: ClassMask,
                            params: EdgeDetectParams) -> EdgePointSet:
    """Per-column upper/lower boundary point extraction.

    Upper point: panel-side pixel of the topmost transition whose edge
    strength exceeds the threshold on the background-above/panel-below
    side (GY2-positive). Lower point: panel-side pixel of the bottommost
    opposite transition (GY1-positive). The response peaks on both pixels
    adjacent to a transition, and on sloped edges the background-side one
    can fire a full row beyond the geometric boundary (the 3-column kernel
    window sees the neighbor column's transition); the panel-side pixel
    stays within one pixel of the boundary and keeps the derived width
    conservative. Points are grouped into segments by gap_tolerance; no
    length filtering.
    """
    if mask.panel_pixel_count() == 0:
        raise NoEdgeError("mask contains no panel pixels")
    if mask.height < 3 or mask.width < 3:
        raise NoEdgeError("mask too small for 3x3 convolution")
    gray = mask_to_gray(mask)
    r1 = kernels.convolve3x3(gray.data, GY1)
    r2 = kernels.convolve3x3(gray.data, GY2)
    upper_y, lower_y = kernels.boundary_rows(r1, r2, params.response_threshold)
    # boundary_rows reports the outermost responding row, which is the
    # background-side neighbor of the transition; step inward one row to
    # land on the panel-side pixel
    upper_y = np.where(upper_y >= 0, np.minimum(upper_y + 1, mask.height - 1), -1)
    lower_y = np.where(lower_y >= 0, np.maximum(lower_y - 1, 0), -1)

    cols = np.arange(mask.width, dtype=np.int64)
    # the 3-column window also fires in empty columns adjacent to the panel
    # ends; a boundary point only makes sense where the column holds panel
    col_has_panel = mask.labels.any(axis=0)
    has_up = (upper_y >= 0) & col_has_panel
    has_lo = (lower_y >= 0) & col_has_panel
    if not has_up.any() and not has_lo.any():
        raise NoEdgeError("no qualifying edge responses")

    upper = _split_segments(cols[has_up], upper_y[has_up], Boundary.UPPER,
                            params.gap_tolerance)
    lower = _split_segments(cols[has_lo], lower_y[has_lo], Boundary.LOWER,
                            params.gap_tolerance)
    return EdgePointSet(tuple(upper), tuple(lower),
                        (mask.width, mask.height))


def filter_segments(points: EdgePointSet,
                    params: EdgeDetectParams) -> EdgePointSet:
    """Drop segments shorter than min_segment_length; order preserved."""
    upper = tuple(s for s in points.upper if len(s) >= params.min_segment_length)
    lower = tuple(s for s in points.lower if len(s) >= params.min_segment_length)
    if not upper and not lower:
        raise AllSegmentsFilteredError(
            f"all segments shorter than {params.min_segment_length} points")
    return EdgePointSet(upper, lower, points.source_dims)

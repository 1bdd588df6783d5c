"""Synthetic panel-mask generator and augmentation transforms.

The generator is the ground-truth oracle for every downstream accuracy
claim: it rasterizes a panel between two boundary lines, optionally
perturbed by a smooth pseudo-random "bark" signal plus sparse gross
outlier columns, while recording the clean (unperturbed) lines. The
fitting pipeline's job is to recover the clean line through the noise, so
the clean line is the regression target.

All generation is a pure function of (spec, frame): the same seed yields
the same mask, byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .imagecore import ClassMask

__all__ = [
    "PanelSpec",
    "GroundTruth",
    "FlipHorizontal",
    "MirrorVertical",
    "Rotate",
    "generate",
    "augment",
    "transform_ground_truth",
]


@dataclass(frozen=True)
class PanelSpec:
    width_px: float              # perpendicular gap between boundaries
    angle_deg: float = 0.0       # main-axis rotation
    center: tuple[float, float] = (0.0, 0.0)  # (x, y) pixels
    length_px: float = 0.0       # extent along the main axis
    bark_amplitude_px: float = 0.0
    bark_waviness: float = 1.0   # spatial frequency scale of the perturbation
    outlier_fraction: float = 0.0
    outlier_magnitude_px: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width_px <= 0:
            raise ValueError("width_px must be positive")
        if self.length_px <= 0:
            raise ValueError("length_px must be positive")
        if not abs(self.angle_deg) < 45:
            raise ValueError("|angle_deg| must be < 45")
        if not 0 <= self.outlier_fraction <= 0.5:
            raise ValueError("outlier_fraction must be in [0, 0.5]")
        if self.bark_amplitude_px < 0 or self.outlier_magnitude_px < 0:
            raise ValueError("perturbation magnitudes must be nonnegative")

    def to_json_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GroundTruth:
    """Clean boundary lines in pixel space, (slope, intercept) each."""

    upper_line: tuple[float, float]
    lower_line: tuple[float, float]
    true_width_px: float   # perpendicular boundary gap
    true_angle_deg: float

    def to_json_dict(self) -> dict:
        return {
            "upper_line": list(self.upper_line),
            "lower_line": list(self.lower_line),
            "true_width_px": self.true_width_px,
            "true_angle_deg": self.true_angle_deg,
        }


# Augmentation ops ----------------------------------------------------------

@dataclass(frozen=True)
class FlipHorizontal:
    pass


@dataclass(frozen=True)
class MirrorVertical:
    pass


@dataclass(frozen=True)
class Rotate:
    degrees: float


def _smooth_signal(rng: np.random.Generator, n_cols: int, amplitude: float,
                   waviness: float) -> np.ndarray:
    """Sum of 2-4 seeded sinusoids scaled to peak |amplitude|."""
    # draws happen even when amplitude is 0 so that outlier column choice
    # stays independent of the amplitude setting
    n_sin = int(rng.integers(2, 5))
    freqs = rng.uniform(0.5, 3.0, n_sin) * waviness
    phases = rng.uniform(0.0, 2.0 * math.pi, n_sin)
    amps = rng.uniform(0.5, 1.0, n_sin)
    t = np.linspace(0.0, 1.0, n_cols)
    s = np.zeros(n_cols)
    for a, f, p in zip(amps, freqs, phases):
        s += a * np.sin(2.0 * math.pi * f * t + p)
    peak = np.abs(s).max()
    if amplitude <= 0 or peak == 0:
        return np.zeros(n_cols)
    return s * (amplitude / peak)


def _outlier_columns(rng: np.random.Generator, n_cols: int,
                     fraction: float) -> np.ndarray:
    n_out = int(round(fraction * n_cols))
    if n_out == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(n_cols, size=n_out, replace=False)


def generate(spec: PanelSpec,
             frame: tuple[int, int]) -> tuple[ClassMask, GroundTruth]:
    """Rasterize a panel mask and return it with its clean ground truth.

    The mask carries label 1 between the (possibly perturbed) boundary
    lines along the panel's x-extent; outlier columns are displaced
    outward, mimicking bark spurs left by segmentation errors.
    """
    frame_w, frame_h = frame
    theta = math.radians(spec.angle_deg)
    k = math.tan(theta)
    cx, cy = spec.center
    half_x = spec.length_px / 2.0 * math.cos(theta)
    x0 = int(math.ceil(cx - half_x))
    x1 = int(math.floor(cx + half_x))
    half_gap = spec.width_px / (2.0 * math.cos(theta))
    b_upper = cy - k * cx - half_gap
    b_lower = cy - k * cx + half_gap

    margin = 3.0 + spec.bark_amplitude_px
    for xe in (x0, x1):
        if k * xe + b_upper - margin < 0 or k * xe + b_lower + margin > frame_h - 1:
            raise ValueError(
                f"panel exceeds frame vertically at x={xe} "
                f"(frame {frame_w}x{frame_h})")
    if x0 < 3 or x1 > frame_w - 4:
        raise ValueError(f"panel exceeds frame horizontally "
                         f"(columns {x0}..{x1}, frame width {frame_w})")

    n_cols = x1 - x0 + 1
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    rng = np.random.default_rng(spec.seed)
    upper = k * xs + b_upper + _smooth_signal(
        rng, n_cols, spec.bark_amplitude_px, spec.bark_waviness)
    lower = k * xs + b_lower + _smooth_signal(
        rng, n_cols, spec.bark_amplitude_px, spec.bark_waviness)
    upper[_outlier_columns(rng, n_cols, spec.outlier_fraction)] -= \
        spec.outlier_magnitude_px
    lower[_outlier_columns(rng, n_cols, spec.outlier_fraction)] += \
        spec.outlier_magnitude_px
    np.clip(upper, 0.0, frame_h - 1.0, out=upper)
    np.clip(lower, 0.0, frame_h, out=lower)

    labels = np.zeros((frame_h, frame_w), dtype=np.uint8)
    ys = np.arange(frame_h, dtype=np.float64)[:, None]
    labels[:, x0:x1 + 1] = ((ys >= upper) & (ys < lower)).astype(np.uint8)

    gt = GroundTruth(
        upper_line=(k, b_upper),
        lower_line=(k, b_lower),
        true_width_px=spec.width_px,
        true_angle_deg=spec.angle_deg,
    )
    return ClassMask(labels), gt


def _rotate_labels(labels: np.ndarray, degrees: float) -> np.ndarray:
    """Nearest-neighbor rotation about the frame center; stays binary."""
    h, w = labels.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    yy, xx = np.indices((h, w))
    dx = xx - cx
    dy = yy - cy
    # inverse map: sample source at R(-t) applied to the output offset
    sx = np.rint(c * dx + s * dy + cx).astype(np.int64)
    sy = np.rint(-s * dx + c * dy + cy).astype(np.int64)
    valid = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.zeros_like(labels)
    out[valid] = labels[sy[valid], sx[valid]]
    return out


def augment(mask: ClassMask,
            op: FlipHorizontal | MirrorVertical | Rotate) -> ClassMask:
    """Apply a deterministic mask transform; labels stay in {0, 1}.

    Rotation uses nearest-neighbor resampling, so boundaries get jagged;
    that is intentional, it stress-tests the robust fitter. Raises when a
    rotation clips the panel (panel pixel count changes by more than 1%).
    """
    if isinstance(op, FlipHorizontal):
        return ClassMask(mask.labels[:, ::-1].copy())
    if isinstance(op, MirrorVertical):
        return ClassMask(mask.labels[::-1, :].copy())
    if isinstance(op, Rotate):
        before = mask.panel_pixel_count()
        out = _rotate_labels(mask.labels, op.degrees)
        after = int(out.sum())
        if before > 0 and abs(after - before) > 0.01 * before:
            raise ValueError(
                f"rotation by {op.degrees} deg clips the panel "
                f"({before} -> {after} pixels)")
        return ClassMask(out)
    raise TypeError(f"unknown augmentation op {op!r}")


def _flip_line_h(line: tuple[float, float], w: int) -> tuple[float, float]:
    k, b = line
    return (-k, k * (w - 1) + b)


def _mirror_line_v(line: tuple[float, float], h: int) -> tuple[float, float]:
    k, b = line
    return (-k, (h - 1) - b)


def _rotate_line(line: tuple[float, float], degrees: float,
                 frame: tuple[int, int]) -> tuple[float, float]:
    k, b = line
    w, h = frame
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    t = math.radians(degrees)
    new_k = math.tan(math.atan(k) + t)
    # rotate the line's point directly below the frame center
    dy = k * cx + b - cy
    px = cx - math.sin(t) * dy
    py = cy + math.cos(t) * dy
    return (new_k, py - new_k * px)


def transform_ground_truth(gt: GroundTruth,
                           op: FlipHorizontal | MirrorVertical | Rotate,
                           frame: tuple[int, int]) -> GroundTruth:
    """Analytic ground-truth update matching augment()."""
    w, h = frame
    if isinstance(op, FlipHorizontal):
        return GroundTruth(
            upper_line=_flip_line_h(gt.upper_line, w),
            lower_line=_flip_line_h(gt.lower_line, w),
            true_width_px=gt.true_width_px,
            true_angle_deg=-gt.true_angle_deg,
        )
    if isinstance(op, MirrorVertical):
        # mirrored lower becomes the new upper and vice versa
        return GroundTruth(
            upper_line=_mirror_line_v(gt.lower_line, h),
            lower_line=_mirror_line_v(gt.upper_line, h),
            true_width_px=gt.true_width_px,
            true_angle_deg=-gt.true_angle_deg,
        )
    if isinstance(op, Rotate):
        return GroundTruth(
            upper_line=_rotate_line(gt.upper_line, op.degrees, frame),
            lower_line=_rotate_line(gt.lower_line, op.degrees, frame),
            true_width_px=gt.true_width_px,
            true_angle_deg=gt.true_angle_deg + op.degrees,
        )
    raise TypeError(f"unknown augmentation op {op!r}")

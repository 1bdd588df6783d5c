"""Machine-actionable key data from the two fitted boundary lines.

Converts pixel-space geometry into physical units through a calibration
profile: panel attitude (main axis + angle), cuttable width, cutting
channel selection, and the lateral travel needed to align the panel with
the selected channel.

Rejection is data, not an exception: every panel yields a PanelKeyData,
and unprocessable inputs carry rejected=True with a reason code from
{fit_degenerate, boundaries_crossed, nonpositive_width, no_channel_fits}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .robustfit import LineFit

__all__ = [
    "CuttingChannel",
    "CalibrationProfile",
    "Attitude",
    "PanelKeyData",
    "CrossedBoundariesError",
    "compute_attitude",
    "cuttable_width",
    "select_channel",
    "compute_keydata",
    "REASON_FIT_DEGENERATE",
    "REASON_BOUNDARIES_CROSSED",
    "REASON_NONPOSITIVE_WIDTH",
    "REASON_NO_CHANNEL_FITS",
]

REASON_FIT_DEGENERATE = "fit_degenerate"
REASON_BOUNDARIES_CROSSED = "boundaries_crossed"
REASON_NONPOSITIVE_WIDTH = "nonpositive_width"
REASON_NO_CHANNEL_FITS = "no_channel_fits"


class CrossedBoundariesError(ValueError):
    """Lower boundary lies above the upper boundary within the panel extent."""


@dataclass(frozen=True)
class CuttingChannel:
    """One fixed saw lane."""

    id: int
    nominal_width_mm: float
    lateral_center_mm: float

    def __post_init__(self):
        if self.nominal_width_mm <= 0:
            raise ValueError("nominal_width_mm must be positive")


@dataclass(frozen=True)
class CalibrationProfile:
    """Binds pixel geometry to machine coordinates."""

    mm_per_px: float
    channels: tuple[CuttingChannel, ...]
    kerf_margin_mm: float = 1.0
    reference_x_px: float = 1536.0  # lateral position evaluated here

    def __post_init__(self):
        if self.mm_per_px <= 0:
            raise ValueError("mm_per_px must be positive")
        if self.kerf_margin_mm < 0:
            raise ValueError("kerf_margin_mm must be nonnegative")
        chans = tuple(self.channels)
        if not chans:
            raise ValueError("at least one cutting channel required")
        widths = [c.nominal_width_mm for c in chans]
        if any(b <= a for a, b in zip(widths, widths[1:])):
            raise ValueError("channel nominal widths must be strictly increasing")
        if len({c.id for c in chans}) != len(chans):
            raise ValueError("channel ids must be unique")
        object.__setattr__(self, "channels", chans)

    def channel_by_id(self, cid: int) -> CuttingChannel:
        for c in self.channels:
            if c.id == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class Attitude:
    """Panel main axis (centerline) in pixel coordinates."""

    main_axis_k: float
    main_axis_b: float
    angle_deg: float  # atan(main_axis_k), counterclockwise positive


@dataclass(frozen=True)
class PanelKeyData:
    cuttable_width_mm: float
    attitude_angle_deg: float
    centerline_offset_mm: float
    selected_channel: int | None
    travel_mm: float | None
    rejected: bool
    reason: str | None

    def to_json_dict(self) -> dict:
        return {
            "width_mm": self.cuttable_width_mm,
            "angle_deg": self.attitude_angle_deg,
            "centerline_offset_mm": self.centerline_offset_mm,
            "channel_id": self.selected_channel,
            "travel_mm": self.travel_mm,
            "rejected": self.rejected,
            "reason": self.reason,
        }


def compute_attitude(upper: LineFit, lower: LineFit) -> Attitude:
    """Main axis = midline of the two boundary lines; angle from its slope."""
    k = (upper.slope_k + lower.slope_k) / 2.0
    b = (upper.intercept_b + lower.intercept_b) / 2.0
    return Attitude(k, b, math.degrees(math.atan(k)))


def _gap_at(upper: LineFit, lower: LineFit, x: float) -> float:
    # vertical gap, y-down frame: positive when lower is below upper
    return lower.y_at(x) - upper.y_at(x)


def cuttable_width(upper: LineFit, lower: LineFit,
                   x_extent: tuple[float, float], attitude: Attitude,
                   cal: CalibrationProfile) -> float:
    """Guaranteed bark-free width in mm over the panel extent.

    The vertical gap between the two lines is linear in x, so its minimum
    over the extent is at an endpoint; the minimum (not the mean) is used
    so the full cut width is certain to lie inside wood. The gap is
    projected perpendicular to the main axis (cos correction) before mm
    scaling.
    """
    x_min, x_max = x_extent
    if not x_min < x_max:
        raise ValueError(f"invalid x extent ({x_min}, {x_max})")
    g_min = min(_gap_at(upper, lower, x_min), _gap_at(upper, lower, x_max))
    if g_min <= 0:
        raise CrossedBoundariesError(
            f"nonpositive boundary gap ({g_min:.2f} px) within extent")
    return g_min * math.cos(math.radians(attitude.angle_deg)) * cal.mm_per_px


def select_channel(width_mm: float, cal: CalibrationProfile) -> int | None:
    """Widest channel whose nominal width plus kerf margin fits, or None."""
    if width_mm < 0:
        raise ValueError("width_mm must be nonnegative")
    best = None
    for ch in cal.channels:  # widths strictly increasing
        if ch.nominal_width_mm + cal.kerf_margin_mm <= width_mm:
            best = ch.id
    return best


def _rejected(reason: str) -> PanelKeyData:
    return PanelKeyData(
        cuttable_width_mm=0.0,
        attitude_angle_deg=0.0,
        centerline_offset_mm=0.0,
        selected_channel=None,
        travel_mm=None,
        rejected=True,
        reason=reason,
    )


def compute_keydata(upper: LineFit, lower: LineFit,
                    x_extent: tuple[float, float],
                    cal: CalibrationProfile) -> PanelKeyData:
    """Compose attitude, width, and channel selection into one record.

    Never raises for degenerate panels; the production line must continue,
    so every failure mode is encoded as a rejection reason.
    """
    if upper.degenerate or lower.degenerate:
        return _rejected(REASON_FIT_DEGENERATE)

    x_min, x_max = x_extent
    if _gap_at(upper, lower, x_min) < 0 or _gap_at(upper, lower, x_max) < 0:
        return _rejected(REASON_BOUNDARIES_CROSSED)

    attitude = compute_attitude(upper, lower)
    try:
        width_mm = cuttable_width(upper, lower, x_extent, attitude, cal)
    except CrossedBoundariesError:
        return _rejected(REASON_NONPOSITIVE_WIDTH)
    except ValueError:
        return _rejected(REASON_FIT_DEGENERATE)

    centerline_offset_mm = (
        attitude.main_axis_k * cal.reference_x_px + attitude.main_axis_b
    ) * cal.mm_per_px

    channel_id = select_channel(width_mm, cal)
    if channel_id is None:
        return PanelKeyData(
            cuttable_width_mm=width_mm,
            attitude_angle_deg=attitude.angle_deg,
            centerline_offset_mm=centerline_offset_mm,
            selected_channel=None,
            travel_mm=None,
            rejected=False,
            reason=REASON_NO_CHANNEL_FITS,
        )
    channel = cal.channel_by_id(channel_id)
    return PanelKeyData(
        cuttable_width_mm=width_mm,
        attitude_angle_deg=attitude.angle_deg,
        centerline_offset_mm=centerline_offset_mm,
        selected_channel=channel_id,
        travel_mm=channel.lateral_center_mm - centerline_offset_mm,
        rejected=False,
        reason=None,
    )

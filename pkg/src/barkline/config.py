"""Pipeline configuration: a flat INI-style file with sections [edge],
[tukey], [calibration], [channels.N], and [io].

Unknown sections or keys are rejected outright so a typo fails fast
instead of silently falling back to a default.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .edgedetect import EdgeDetectParams
from .keydata import CalibrationProfile, CuttingChannel
from .robustfit import TukeyParams

__all__ = ["ConfigError", "IOConfig", "PipelineConfig", "load_config",
           "default_config", "DEFAULT_CONFIG_TEXT", "ENV_CONFIG_VAR"]

ENV_CONFIG_VAR = "BARKLINE_CONFIG"

_EDGE_KEYS = {"response_threshold", "min_segment_length", "gap_tolerance"}
_TUKEY_KEYS = {"c_mode", "c_value", "weight_variant", "max_iterations",
               "tol_slope", "tol_intercept"}
_CAL_KEYS = {"mm_per_px", "kerf_margin_mm", "reference_x_px"}
_CHANNEL_KEYS = {"nominal_width_mm", "lateral_center_mm"}
_IO_KEYS = {"input_glob", "output_dir", "overlay"}

DEFAULT_CONFIG_TEXT = """\
# barkline pipeline configuration
# Every key shown here carries its default value.

[edge]
# edge-strength cutoff; any nonzero transition on a binary mask exceeds 1.0
response_threshold = 1.0
# segments with fewer boundary points than this are discarded
min_segment_length = 20
# max column gap (px) inside one segment
gap_tolerance = 2

[tukey]
# "mad": cutoff = c_value * 1.4826 * MAD of residuals, each iteration
# "fixed": cutoff = c_value pixels
c_mode = mad
c_value = 4.685
# "biweight" (standard) or "inverted" (zero-at-zero-residual alternative)
weight_variant = biweight
max_iterations = 50
tol_slope = 1e-6
tol_intercept = 1e-3

[calibration]
mm_per_px = 0.42
kerf_margin_mm = 1.0
reference_x_px = 1536

# one [channels.N] section per saw lane, N = channel id;
# nominal widths must be strictly increasing with N
[channels.1]
nominal_width_mm = 42.0
lateral_center_mm = 100.0

[channels.2]
nominal_width_mm = 52.0
lateral_center_mm = 200.0

[channels.3]
nominal_width_mm = 62.0
lateral_center_mm = 300.0

[channels.4]
nominal_width_mm = 72.0
lateral_center_mm = 400.0

[io]
input_glob =
output_dir = .
overlay = false
"""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class IOConfig:
    input_glob: str = ""
    output_dir: str = "."
    overlay: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    edge: EdgeDetectParams = field(default_factory=EdgeDetectParams)
    tukey: TukeyParams = field(default_factory=TukeyParams)
    calibration: CalibrationProfile = None  # type: ignore[assignment]
    io: IOConfig = field(default_factory=IOConfig)


def _default_channels() -> tuple[CuttingChannel, ...]:
    return (
        CuttingChannel(1, 42.0, 100.0),
        CuttingChannel(2, 52.0, 200.0),
        CuttingChannel(3, 62.0, 300.0),
        CuttingChannel(4, 72.0, 400.0),
    )


def default_config() -> PipelineConfig:
    return PipelineConfig(
        edge=EdgeDetectParams(),
        tukey=TukeyParams(),
        calibration=CalibrationProfile(
            mm_per_px=0.42,
            channels=_default_channels(),
            kerf_margin_mm=1.0,
            reference_x_px=1536.0,
        ),
        io=IOConfig(),
    )


def _check_keys(section: str, present, allowed: set[str]) -> None:
    unknown = set(present) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def load_config(path: str | os.PathLike) -> PipelineConfig:
    """Parse and validate a config file; all values default as documented."""
    parser = configparser.ConfigParser()
    try:
        with open(os.fspath(path), "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    known = {"edge", "tukey", "calibration", "io"}
    channel_sections = []
    for section in parser.sections():
        if section in known:
            continue
        if section.startswith("channels."):
            channel_sections.append(section)
        else:
            raise ConfigError(f"unknown section [{section}]")

    defaults = default_config()
    try:
        if parser.has_section("edge"):
            _check_keys("edge", parser.options("edge"), _EDGE_KEYS)
            edge = EdgeDetectParams(
                response_threshold=_get(parser, "edge", "response_threshold",
                                        float, 1.0),
                min_segment_length=_get(parser, "edge", "min_segment_length",
                                        int, 20),
                gap_tolerance=_get(parser, "edge", "gap_tolerance", int, 2),
            )
        else:
            edge = defaults.edge

        if parser.has_section("tukey"):
            _check_keys("tukey", parser.options("tukey"), _TUKEY_KEYS)
            tukey = TukeyParams(
                c_mode=_get(parser, "tukey", "c_mode", str, "mad"),
                c_value=_get(parser, "tukey", "c_value", float, 4.685),
                weight_variant=_get(parser, "tukey", "weight_variant", str,
                                    "biweight"),
                max_iterations=_get(parser, "tukey", "max_iterations", int, 50),
                convergence_tol_slope=_get(parser, "tukey", "tol_slope",
                                           float, 1e-6),
                convergence_tol_intercept=_get(parser, "tukey", "tol_intercept",
                                               float, 1e-3),
            )
        else:
            tukey = defaults.tukey

        channels = []
        for section in sorted(channel_sections,
                              key=lambda s: int(s.split(".", 1)[1])):
            _check_keys(section, parser.options(section), _CHANNEL_KEYS)
            try:
                cid = int(section.split(".", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"bad channel id in [{section}]") from exc
            channels.append(CuttingChannel(
                id=cid,
                nominal_width_mm=_get(parser, section, "nominal_width_mm",
                                      float, 0.0),
                lateral_center_mm=_get(parser, section, "lateral_center_mm",
                                       float, 0.0),
            ))

        if parser.has_section("calibration"):
            _check_keys("calibration", parser.options("calibration"), _CAL_KEYS)
            cal = CalibrationProfile(
                mm_per_px=_get(parser, "calibration", "mm_per_px", float, 0.42),
                channels=tuple(channels) or _default_channels(),
                kerf_margin_mm=_get(parser, "calibration", "kerf_margin_mm",
                                    float, 1.0),
                reference_x_px=_get(parser, "calibration", "reference_x_px",
                                    float, 1536.0),
            )
        else:
            cal = CalibrationProfile(
                mm_per_px=0.42,
                channels=tuple(channels) or _default_channels(),
                kerf_margin_mm=1.0,
                reference_x_px=1536.0,
            )

        if parser.has_section("io"):
            _check_keys("io", parser.options("io"), _IO_KEYS)
            io_cfg = IOConfig(
                input_glob=_get(parser, "io", "input_glob", str, ""),
                output_dir=_get(parser, "io", "output_dir", str, "."),
                overlay=_get(parser, "io", "overlay", bool, False),
            )
        else:
            io_cfg = defaults.io
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    return PipelineConfig(edge=edge, tukey=tukey, calibration=cal, io=io_cfg)


def resolve_config(path: str | None) -> PipelineConfig:
    """CLI helper: explicit path, else $BARKLINE_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR)
    if path is None:
        return default_config()
    return load_config(path)

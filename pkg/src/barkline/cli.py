"""Command-line front end.

Subcommands: keydata, batch, segment-eval, overlay, bench, synth.
Exit codes: 0 success (including rejected panels -- rejection is data),
2 configuration or argument errors, 3 I/O errors.
"""
from __future__ import annotations

import argparse
import glob as globmod
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, PipelineConfig, resolve_config
from .edgedetect import Boundary
from .imagecore import ClassMask, MaskFormatError, load_mask, save_mask
from .pipeline import PanelAnalysis, analyze_mask
from .segeval import evaluate_directory
from .synthgen import PanelSpec, generate

__all__ = ["main", "BenchReport"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


@dataclass(frozen=True)
class BenchReport:
    masks_processed: int
    wall_seconds: float
    masks_per_second: float
    panels_per_minute: float
    p50_ms: dict[str, float]
    p95_ms: dict[str, float]
    backend: str
    repetitions: int

    def to_json_dict(self) -> dict:
        return {
            "masks_processed": self.masks_processed,
            "wall_seconds": self.wall_seconds,
            "masks_per_second": self.masks_per_second,
            "panels_per_minute": self.panels_per_minute,
            "p50_ms": self.p50_ms,
            "p95_ms": self.p95_ms,
            "backend": self.backend,
            "repetitions": self.repetitions,
        }


def _json_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True)


def _analyze_path(path: str, cfg: PipelineConfig) -> PanelAnalysis:
    mask = load_mask(path)
    return analyze_mask(mask, cfg.edge, cfg.tukey, cfg.calibration)


# -- keydata ----------------------------------------------------------------

def cmd_keydata(args) -> int:
    try:
        cfg = resolve_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        analysis = _analyze_path(args.mask, cfg)
    except (MaskFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(_json_line(analysis.keydata.to_json_dict()))
    return EXIT_OK


# -- batch ------------------------------------------------------------------

def _batch_one(path: str, cfg: PipelineConfig) -> dict:
    try:
        analysis = _analyze_path(path, cfg)
    except (MaskFormatError, OSError) as exc:
        return {"path": path, "error": str(exc)}
    return {"path": path, **analysis.keydata.to_json_dict()}


def cmd_batch(args) -> int:
    try:
        cfg = resolve_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    paths = sorted(globmod.glob(args.glob))
    if not paths:
        print(f"no files match {args.glob!r}", file=sys.stderr)
        return EXIT_CONFIG

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda p: _batch_one(p, cfg), paths))
    else:
        results = [_batch_one(p, cfg) for p in paths]

    rejected: dict[str, int] = {}
    channels: dict[str, int] = {}
    errors = 0
    for rec in results:  # already in sorted-path order
        print(_json_line(rec))
        if "error" in rec:
            errors += 1
        elif rec["rejected"]:
            rejected[rec["reason"]] = rejected.get(rec["reason"], 0) + 1
        elif rec["channel_id"] is not None:
            key = str(rec["channel_id"])
            channels[key] = channels.get(key, 0) + 1
    print(_json_line({"summary": {
        "processed": len(results),
        "errors": errors,
        "rejected_by_reason": rejected,
        "channel_histogram": channels,
    }}))
    return EXIT_OK


# -- segment-eval -------------------------------------------------------------

def cmd_segment_eval(args) -> int:
    try:
        report = evaluate_directory(args.truth_dir, args.pred_dir)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(report.to_table())
    print(_json_line(report.to_json_dict()))
    if report.failed_files:
        for item in report.failed_files:
            print(f"failed: {item}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# -- overlay ------------------------------------------------------------------

# distinct gray levels for the diagnostic rendering
_GRAY_PANEL = 64
_GRAY_POINTS = 128
_GRAY_AXIS = 200
_GRAY_LINES = 255


def _draw_line(img: np.ndarray, k: float, b: float,
               x_extent: tuple[float, float], level: int) -> None:
    h, w = img.shape
    x0 = max(int(math.ceil(x_extent[0])), 0)
    x1 = min(int(math.floor(x_extent[1])), w - 1)
    if x1 < x0:
        return
    xs = np.arange(x0, x1 + 1)
    ys = np.rint(k * xs + b).astype(np.int64)
    ok = (ys >= 0) & (ys < h)
    img[ys[ok], xs[ok]] = level


def render_overlay(mask: ClassMask, analysis: PanelAnalysis) -> np.ndarray:
    """Grayscale diagnostic image; pure observer of the pipeline result."""
    img = mask.labels * np.uint8(_GRAY_PANEL)
    if analysis.points is not None:
        for segs in (analysis.points.upper, analysis.points.lower):
            for seg in segs:
                img[seg.ys, seg.xs] = _GRAY_POINTS
    if not analysis.keydata.rejected and analysis.x_extent is not None:
        kd = analysis.keydata
        axis_k = math.tan(math.radians(kd.attitude_angle_deg))
        upper, lower = analysis.upper_fit, analysis.lower_fit
        axis_b = (upper.intercept_b + lower.intercept_b) / 2.0
        _draw_line(img, axis_k, axis_b, analysis.x_extent, _GRAY_AXIS)
        _draw_line(img, upper.slope_k, upper.intercept_b, analysis.x_extent,
                   _GRAY_LINES)
        _draw_line(img, lower.slope_k, lower.intercept_b, analysis.x_extent,
                   _GRAY_LINES)
    return img


def _save_gray(img: np.ndarray, path: str) -> None:
    if path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(img, mode="L").save(path, format="PNG")
    else:
        from .imagecore import _write_pgm_p5

        _write_pgm_p5(img, path)


def cmd_overlay(args) -> int:
    try:
        cfg = resolve_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        mask = load_mask(args.mask)
    except (MaskFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    analysis = analyze_mask(mask, cfg.edge, cfg.tukey, cfg.calibration)
    img = render_overlay(mask, analysis)
    try:
        _save_gray(img, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# -- bench --------------------------------------------------------------------

def cmd_bench(args) -> int:
    from . import kernels

    try:
        cfg = resolve_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.repetitions < 1:
        print("repetitions must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    paths = sorted(globmod.glob(args.glob))
    if not paths:
        print(f"no files match {args.glob!r}", file=sys.stderr)
        return EXIT_CONFIG

    stage_times: dict[str, list[float]] = {"edge": [], "fit": [], "keydata": []}
    pipeline_seconds = 0.0
    runs = 0
    for path in paths:
        try:
            mask = load_mask(path)  # file I/O excluded from timings
        except (MaskFormatError, OSError) as exc:
            print(f"skipping {path}: {exc}", file=sys.stderr)
            continue
        for _ in range(args.repetitions):
            timings: dict[str, float] = {}
            analyze_mask(mask, cfg.edge, cfg.tukey, cfg.calibration,
                         timings=timings)
            for stage, seconds in timings.items():
                stage_times[stage].append(seconds)
            pipeline_seconds += sum(timings.values())
            runs += 1
    if runs == 0:
        print("no masks could be processed", file=sys.stderr)
        return EXIT_IO

    report = BenchReport(
        masks_processed=runs,
        wall_seconds=pipeline_seconds,
        masks_per_second=runs / pipeline_seconds if pipeline_seconds > 0 else 0.0,
        panels_per_minute=(runs / pipeline_seconds * 60.0
                           if pipeline_seconds > 0 else 0.0),
        p50_ms={s: float(np.percentile(v, 50)) * 1e3
                for s, v in stage_times.items()},
        p95_ms={s: float(np.percentile(v, 95)) * 1e3
                for s, v in stage_times.items()},
        backend=kernels.BACKEND,
        repetitions=args.repetitions,
    )
    print(_json_line(report.to_json_dict()))
    return EXIT_OK


# -- synth --------------------------------------------------------------------

def _parse_range(text: str) -> tuple[float, float]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return float(lo), float(hi)
    v = float(text)
    return v, v


def _parse_frame(text: str) -> tuple[int, int]:
    w, h = text.lower().split("x", 1)
    return int(w), int(h)


def cmd_synth(args) -> int:
    try:
        frame = _parse_frame(args.frame)
        w_lo, w_hi = _parse_range(args.width_px)
        a_lo, a_hi = _parse_range(args.angle_deg)
    except ValueError as exc:
        print(f"bad spec argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    names = []
    for i in range(args.count):
        spec_kwargs = dict(
            width_px=float(rng.uniform(w_lo, w_hi)),
            angle_deg=float(rng.uniform(a_lo, a_hi)),
            center=(frame[0] / 2.0, frame[1] / 2.0),
            length_px=args.length_px,
            bark_amplitude_px=args.bark_amplitude,
            bark_waviness=args.bark_waviness,
            outlier_fraction=args.outlier_fraction,
            outlier_magnitude_px=args.outlier_magnitude,
            seed=int(rng.integers(0, 2 ** 31)),
        )
        try:
            spec = PanelSpec(**spec_kwargs)
            mask, gt = generate(spec, frame)
        except ValueError as exc:
            print(f"invalid spec for mask {i}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        name = f"mask_{i:04d}"
        names.append(name)
        try:
            save_mask(mask, os.path.join(args.out_dir, name + ".pgm"))
            sidecar = {"spec": spec.to_json_dict(), "ground_truth":
                       gt.to_json_dict()}
            with open(os.path.join(args.out_dir, name + ".json"), "w",
                      encoding="utf-8") as fh:
                json.dump(sidecar, fh, sort_keys=True, indent=2)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO

    if args.split:
        try:
            a, b = (int(p) for p in args.split.split(":", 1))
            if a <= 0 or b <= 0:
                raise ValueError("split parts must be positive")
        except ValueError as exc:
            print(f"bad --split: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        order = np.random.default_rng(args.seed).permutation(len(names))
        n_train = round(len(names) * a / (a + b))
        for sub in ("train", "val"):
            os.makedirs(os.path.join(args.out_dir, sub), exist_ok=True)
        for rank, idx in enumerate(order):
            sub = "train" if rank < n_train else "val"
            for ext in (".pgm", ".json"):
                src = os.path.join(args.out_dir, names[idx] + ext)
                os.replace(src, os.path.join(args.out_dir, sub,
                                             names[idx] + ext))
    return EXIT_OK


# ------------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barkline",
        description="Panel boundary geometry and bark-removal key data "
                    "from segmentation masks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", default=None,
                       help="config file (else $BARKLINE_CONFIG, else defaults)")

    p = sub.add_parser("keydata", help="key data for one mask, JSON on stdout")
    p.add_argument("mask")
    add_config(p)
    p.set_defaults(func=cmd_keydata)

    p = sub.add_parser("batch", help="JSON-lines key data for a mask glob")
    p.add_argument("glob")
    add_config(p)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads (output is order-independent)")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("segment-eval",
                       help="MIoU/MPA over truth/prediction mask directories")
    p.add_argument("truth_dir")
    p.add_argument("pred_dir")
    p.set_defaults(func=cmd_segment_eval)

    p = sub.add_parser("overlay", help="diagnostic rendering of one mask")
    p.add_argument("mask")
    p.add_argument("out")
    add_config(p)
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("bench", help="pipeline throughput benchmark")
    p.add_argument("glob")
    add_config(p)
    p.add_argument("--repetitions", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate synthetic masks + ground truth")
    p.add_argument("out_dir")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frame", default="640x480", help="frame WxH in pixels")
    p.add_argument("--width-px", default="100",
                   help="panel width in px, value or lo:hi range")
    p.add_argument("--angle-deg", default="0",
                   help="main-axis angle in degrees, value or lo:hi range")
    p.add_argument("--length-px", type=float, default=400.0)
    p.add_argument("--bark-amplitude", type=float, default=0.0)
    p.add_argument("--bark-waviness", type=float, default=1.0)
    p.add_argument("--outlier-fraction", type=float, default=0.0)
    p.add_argument("--outlier-magnitude", type=float, default=0.0)
    p.add_argument("--split", default=None,
                   help="A:B train/val split into subdirectories")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

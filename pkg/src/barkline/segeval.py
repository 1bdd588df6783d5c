"""Segmentation-quality metrics: confusion-count accumulation, mean
intersection-over-union, and mean pixel accuracy, plus batch evaluation
over directories of truth/prediction mask pairs.

A single dataset-level confusion matrix is accumulated (not per-image
metric averaging), matching the standard definitions. Classes absent from
both truth and prediction (IoU) or from truth (PA) have undefined ratios;
they are excluded from the mean and flagged in the report.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .imagecore import ClassMask, MaskFormatError, load_mask

__all__ = [
    "ConfusionMatrix",
    "SegEvalReport",
    "accumulate",
    "miou",
    "mpa",
    "per_class_iou",
    "per_class_pa",
    "evaluate_directory",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i][j] = pixels of true class i predicted as class j.

    k is the number of non-background classes; the matrix is (k+1)^2.
    Fixed to k=1 for the panel/background problem, but kept generic.
    """

    counts: np.ndarray
    k: int = 1

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        n = self.k + 1
        if c.shape != (n, n):
            raise ValueError(f"counts must be {n}x{n}, got {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @classmethod
    def zeros(cls, k: int = 1) -> "ConfusionMatrix":
        return cls(np.zeros((k + 1, k + 1), dtype=np.int64), k=k)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merged(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.k != other.k:
            raise ValueError("class-count mismatch")
        return ConfusionMatrix(self.counts + other.counts, k=self.k)


@dataclass(frozen=True)
class SegEvalReport:
    miou: float
    mpa: float
    per_class_iou: list[float]
    per_class_pa: list[float]
    pixel_total: int
    image_count: int
    undefined_classes: list[int] = field(default_factory=list)
    failed_files: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "miou": self.miou,
            "mpa": self.mpa,
            "per_class_iou": self.per_class_iou,
            "per_class_pa": self.per_class_pa,
            "pixel_total": self.pixel_total,
            "image_count": self.image_count,
            "undefined_classes": self.undefined_classes,
            "failed_files": self.failed_files,
        }

    def to_table(self) -> str:
        """Plain-text table with percentage columns."""
        lines = [
            f"{'Images':>10}  {'Pixels':>14}  {'MIoU/%':>8}  {'MPA/%':>8}",
            f"{self.image_count:>10}  {self.pixel_total:>14}  "
            f"{self.miou * 100:>8.2f}  {self.mpa * 100:>8.2f}",
        ]
        return "\n".join(lines)


def accumulate(cm: ConfusionMatrix, truth: ClassMask,
               pred: ClassMask) -> ConfusionMatrix:
    """Add one truth/prediction pair's pixel tallies. Order-independent."""
    if truth.labels.shape != pred.labels.shape:
        raise ValueError(
            f"dimension mismatch: truth {truth.labels.shape} vs "
            f"pred {pred.labels.shape}")
    n = cm.k + 1
    flat = truth.labels.astype(np.int64).ravel() * n + pred.labels.ravel()
    add = np.bincount(flat, minlength=n * n).reshape(n, n)
    return ConfusionMatrix(cm.counts + add, k=cm.k)


def per_class_iou(cm: ConfusionMatrix) -> np.ndarray:
    """IoU per class; NaN where the class is absent from truth and prediction."""
    c = cm.counts.astype(np.float64)
    diag = np.diag(c)
    union = c.sum(axis=1) + c.sum(axis=0) - diag
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, diag / union, np.nan)


def per_class_pa(cm: ConfusionMatrix) -> np.ndarray:
    """Pixel accuracy per class; NaN where the class is absent from truth."""
    c = cm.counts.astype(np.float64)
    row = c.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(row > 0, np.diag(c) / row, np.nan)


def miou(cm: ConfusionMatrix) -> float:
    """Mean IoU over classes with a defined ratio."""
    ious = per_class_iou(cm)
    defined = ious[~np.isnan(ious)]
    if len(defined) == 0:
        raise ValueError("no class present in truth or prediction")
    return float(defined.mean())


def mpa(cm: ConfusionMatrix) -> float:
    """Mean pixel accuracy over classes present in truth."""
    pas = per_class_pa(cm)
    defined = pas[~np.isnan(pas)]
    if len(defined) == 0:
        raise ValueError("no class present in truth")
    return float(defined.mean())


def _mask_files(directory: str) -> dict[str, str]:
    out = {}
    for name in os.listdir(directory):
        if name.lower().endswith((".pgm", ".png")):
            out[name] = os.path.join(directory, name)
    return out


def evaluate_directory(truth_dir: str, pred_dir: str) -> SegEvalReport:
    """Evaluate same-named truth/prediction mask pairs.

    Accumulates one global confusion matrix over all pairs. Unmatched
    filenames and per-pair failures are recorded in failed_files and
    evaluation continues; raises only when no pair can be evaluated.
    """
    truths = _mask_files(truth_dir)
    preds = _mask_files(pred_dir)
    failed = [f"unmatched: {n}" for n in sorted(set(truths) ^ set(preds))]
    common = sorted(set(truths) & set(preds))
    if not common and not failed:
        raise ValueError("no pairs found")

    cm = ConfusionMatrix.zeros(k=1)
    count = 0
    for name in common:
        try:
            t = load_mask(truths[name])
            p = load_mask(preds[name])
            cm = accumulate(cm, t, p)
            count += 1
        except (MaskFormatError, ValueError) as exc:
            failed.append(f"{name}: {exc}")
    if count == 0:
        raise ValueError("no pairs found" if not common else
                         f"no evaluable pairs ({len(failed)} failures)")

    ious = per_class_iou(cm)
    pas = per_class_pa(cm)
    undefined = sorted(set(np.nonzero(np.isnan(ious))[0].tolist())
                       | set(np.nonzero(np.isnan(pas))[0].tolist()))
    return SegEvalReport(
        miou=miou(cm),
        mpa=mpa(cm),
        per_class_iou=[float(v) for v in ious],
        per_class_pa=[float(v) for v in pas],
        pixel_total=cm.total,
        image_count=count,
        undefined_classes=undefined,
        failed_files=failed,
    )

"""Core raster types and bit-exact mask file I/O.

Images are stored as 2D NumPy arrays in row-major order, origin top-left,
x rightward, y downward. Arrays are frozen (read-only) after construction
so instances can be shared freely across workers.

Interchange formats: binary PGM (P5, maxval 255) as the canonical format,
8-bit grayscale PNG for interoperability with annotation tools.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GrayImage",
    "ClassMask",
    "SignedResponseImage",
    "MaskFormatError",
    "load_mask",
    "save_mask",
    "mask_to_gray",
]

LOAD_THRESHOLD = 128  # pixel >= this maps to label 1 (panel)


class MaskFormatError(ValueError):
    """Raised for unreadable, unsupported, or degenerate mask files."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Single-channel 8-bit intensity image."""

    data: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError(f"expected 2D data, got shape {self.data.shape}")
        h, w = self.data.shape
        if h < 1 or w < 1:
            raise ValueError("zero-dimension image")
        if self.data.dtype != np.uint8:
            raise ValueError(f"expected uint8 data, got {self.data.dtype}")
        object.__setattr__(self, "data", _freeze(self.data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ClassMask:
    """Two-class per-pixel labeling: 0 = background (incl. bark), 1 = panel."""

    labels: np.ndarray  # uint8 in {0, 1}, shape (height, width)

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError(f"expected 2D labels, got shape {self.labels.shape}")
        h, w = self.labels.shape
        if h < 1 or w < 1:
            raise ValueError("zero-dimension mask")
        if self.labels.dtype != np.uint8:
            raise ValueError(f"expected uint8 labels, got {self.labels.dtype}")
        if self.labels.max(initial=0) > 1:
            raise ValueError("labels must be in {0, 1}")
        object.__setattr__(self, "labels", _freeze(self.labels))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def panel_pixel_count(self) -> int:
        return int(self.labels.sum())


@dataclass(frozen=True)
class SignedResponseImage:
    """Raw signed convolution responses, same dimensions as the source."""

    data: np.ndarray  # int32, shape (height, width)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError(f"expected 2D data, got shape {self.data.shape}")
        object.__setattr__(self, "data", _freeze(self.data.astype(np.int32)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


# ---------------------------------------------------------------------------
# PGM (binary P5) reading/writing. Hand-rolled so round-trips are bit-exact
# and the canonical format needs no imaging library.
# ---------------------------------------------------------------------------

def _read_pgm_p5(raw: bytes, path: str) -> np.ndarray:
    pos = 2  # past the "P5" magic

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(raw):
            ch = raw[pos:pos + 1]
            if ch == b"#":  # comment runs to end of line
                while pos < len(raw) and raw[pos:pos + 1] not in b"\r\n":
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MaskFormatError(f"{path}: truncated PGM header")
        return raw[start:pos]

    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise MaskFormatError(f"{path}: malformed PGM header") from exc
    pos += 1  # single whitespace byte after maxval
    if width < 1 or height < 1:
        raise MaskFormatError(f"{path}: zero-dimension image")
    if maxval != 255:
        raise MaskFormatError(f"{path}: unsupported PGM maxval {maxval} (need 255)")
    pixels = raw[pos:pos + width * height]
    if len(pixels) != width * height:
        raise MaskFormatError(f"{path}: PGM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def _write_pgm_p5(gray: np.ndarray, path: str) -> None:
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(gray, dtype=np.uint8).tobytes())


def _read_png(path: str) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode not in ("L", "1", "I;16", "P", "LA"):
            # color masks are ambiguous; require grayscale
            raise MaskFormatError(f"{path}: unsupported PNG mode {im.mode!r}")
        gray = np.asarray(im.convert("L"), dtype=np.uint8)
    if gray.ndim != 2 or gray.size == 0:
        raise MaskFormatError(f"{path}: zero-dimension image")
    return gray


def load_mask(path: str | os.PathLike) -> ClassMask:
    """Load a ClassMask from an 8-bit grayscale PNG or binary PGM (P5).

    Pixels >= 128 map to label 1 (panel), others to 0. Soft masks saved
    as grayscale are binarized at the midpoint.
    """
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise MaskFormatError(f"{path}: cannot read ({exc})") from exc
    if raw[:2] == b"P5":
        gray = _read_pgm_p5(raw, path)
    elif raw[:8] == b"\x89PNG\r\n\x1a\n":
        gray = _read_png(path)
    else:
        raise MaskFormatError(f"{path}: not a binary PGM (P5) or PNG file")
    return ClassMask((gray >= LOAD_THRESHOLD).astype(np.uint8))


def save_mask(mask: ClassMask, path: str | os.PathLike) -> None:
    """Write a ClassMask as PGM (default) or PNG (by .png extension).

    Label 1 is written as 255, label 0 as 0, so load_mask round-trips.
    """
    path = os.fspath(path)
    gray = mask.labels * np.uint8(255)
    if path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(gray, mode="L").save(path, format="PNG")
    else:
        _write_pgm_p5(gray, path)


def mask_to_gray(mask: ClassMask) -> GrayImage:
    """Map labels to intensities: 1 -> 255, 0 -> 0."""
    return GrayImage(mask.labels * np.uint8(255))

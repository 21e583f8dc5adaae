"""Grayscale raster I/O, contrast stretching and binary mask output.

Images follow the ink-dark convention: 0 is ink, 1 is background. Sources
with bright ink can be flipped at load time with ``invert``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InputError

_SUPPORTED_FORMATS = {"PNG", "PPM"}  # Pillow reports binary PGM as PPM

Source = Union[str, Path, bytes, IO[bytes]]


@dataclass(frozen=True)
class GrayImage:
    """Normalized grayscale raster; ``pixels`` is a (height, width) float array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2 or px.size == 0:
            raise InputError("pixels must be a non-empty 2-D array")
        if px.min() < 0.0 or px.max() > 1.0:
            raise InputError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Boolean raster, true where a stroke covers the pixel."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.size == 0:
            raise InputError("mask bits must be a non-empty 2-D array")
        object.__setattr__(self, "bits", bits)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


def _open_image(source: Source) -> Image.Image:
    try:
        if isinstance(source, bytes):
            return Image.open(io.BytesIO(source))
        return Image.open(source)
    except (UnidentifiedImageError, OSError) as exc:
        raise InputError(f"cannot decode image: {exc}") from exc


def load_gray(source: Source, invert: bool = False) -> GrayImage:
    """Load an 8-bit grayscale PNG or binary PGM, scaled to [0, 1].

    ``invert`` flips values (pixel -> 1 - pixel) for bright-ink media so the
    result honors the ink-dark convention.
    """
    img = _open_image(source)
    if img.format not in _SUPPORTED_FORMATS:
        raise InputError(f"unsupported format {img.format!r}; expected PNG or PGM")
    if img.mode != "L":
        raise InputError(f"not 8-bit grayscale (mode {img.mode!r})")
    px = np.asarray(img, dtype=float) / 255.0
    if invert:
        px = 1.0 - px
    return GrayImage(px)


def save_gray(img: GrayImage, target: Union[str, Path, IO[bytes]]) -> None:
    """Write an 8-bit grayscale PNG."""
    data = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(target, format="PNG")


def gray_png_bytes(img: GrayImage) -> bytes:
    buf = io.BytesIO()
    save_gray(img, buf)
    return buf.getvalue()


def histogram_stretch(img: GrayImage, lo_pct: float = 1.0, hi_pct: float = 99.0) -> GrayImage:
    """Linear contrast stretch between two gray-level percentiles.

    The lo_pct percentile maps to 0 and the hi_pct percentile to 1, with
    clamping; a flat image (coinciding percentiles) maps to 0.5 everywhere.
    """
    if not 0.0 <= lo_pct < hi_pct <= 100.0:
        raise InputError("percentiles must satisfy 0 <= lo < hi <= 100")
    lo = float(np.percentile(img.pixels, lo_pct))
    hi = float(np.percentile(img.pixels, hi_pct))
    if hi == lo:
        return GrayImage(np.full_like(img.pixels, 0.5))
    stretched = np.clip((img.pixels - lo) / (hi - lo), 0.0, 1.0)
    return GrayImage(stretched)


def save_mask(mask: BinaryMask, target: Union[str, Path, IO[bytes]]) -> None:
    """Write the mask as a black-on-white PNG (foreground black)."""
    data = np.where(mask.bits, 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(target, format="PNG")


def mask_png_bytes(mask: BinaryMask) -> bytes:
    buf = io.BytesIO()
    save_mask(mask, buf)
    return buf.getvalue()


def load_mask(source: Source) -> BinaryMask:
    """Read a saved mask back; any pixel darker than mid-gray is foreground."""
    img = load_gray(source)
    return BinaryMask(img.pixels < 0.5)

"""Swept-disc stroke model: disc rasterization, gray mass, mask rendering.

A stroke is the union of discs centered on the pen path with the local pen
radius. Pixel membership is a pixel-center test against the disc equation;
pixels outside the image count as background (value 1) when summing gray
mass, which penalizes solutions that wander off the medium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from .errors import InputError
from .image_io import BinaryMask, GrayImage
from .spline import SplineCurve, eval_curve

# Discs below this radius contribute no pixels to the gray mass.
RADIUS_FLOOR = 0.25

DEFAULT_SAMPLES_PER_INTERVAL = 16

Bounds = Tuple[int, int]  # (width, height)


@dataclass(frozen=True)
class Disc:
    x: float
    y: float
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise InputError("disc radius must be nonnegative")


def _column_range(x: float, r: float) -> Tuple[int, int]:
    return math.ceil(x - r), math.floor(x + r)


def _bbox_membership(disc: Disc):
    """Column/row index arrays of the bounding box and the membership mask.

    Every consumer shares this one predicate, (p-x)^2 + (q-y)^2 <= r^2, so
    pixel totals never disagree at boundary-of-disc rounding ulps.
    """
    x, y, r = disc.x, disc.y, disc.r
    p_lo, p_hi = _column_range(x, r)
    q_lo, q_hi = _column_range(y, r)
    if p_hi < p_lo or q_hi < q_lo:
        return None
    ps = np.arange(p_lo, p_hi + 1)
    qs = np.arange(q_lo, q_hi + 1)
    inside = ((qs[:, None] - y) ** 2 + (ps[None, :] - x) ** 2) <= r * r
    return ps, qs, inside


def disc_pixels(disc: Disc, bounds: Bounds) -> Iterator[Tuple[int, int, bool]]:
    """Yield (p, q, in_bounds) for every integer pixel center inside the disc.

    Membership is (p - x)^2 + (q - y)^2 <= r^2; the flag marks whether the
    pixel lies inside the (width, height) raster.
    """
    width, height = bounds
    cells = _bbox_membership(disc)
    if cells is None:
        return
    ps, qs, inside = cells
    for row, q in enumerate(qs):
        for col in np.nonzero(inside[row])[0]:
            p = int(ps[col])
            yield p, int(q), (0 <= p < width and 0 <= q < height)


def gray_mass(img: GrayImage, disc: Disc) -> float:
    """Sum of image values over the disc; out-of-image pixels count as 1.

    Returns 0 for discs below RADIUS_FLOOR, which contribute no pixels.
    """
    if disc.r < RADIUS_FLOOR:
        return 0.0
    cells = _bbox_membership(disc)
    if cells is None:
        return 0.0
    ps, qs, inside = cells
    total = int(inside.sum())
    if total == 0:
        return 0.0
    h, w = img.pixels.shape
    sel_p = (ps >= 0) & (ps < w)
    sel_q = (qs >= 0) & (qs < h)
    if not sel_p.any() or not sel_q.any():
        return float(total)  # disc fully off-image: all background
    sub = inside[sel_q][:, sel_p]
    window = img.pixels[qs[sel_q][0]:qs[sel_q][-1] + 1, ps[sel_p][0]:ps[sel_p][-1] + 1]
    in_sum = float(window[sub].sum())
    in_count = int(sub.sum())
    return in_sum + float(total - in_count)


def disc_pixel_count(disc: Disc) -> int:
    """Number of integer pixel centers inside the disc, bounds-free."""
    cells = _bbox_membership(disc)
    return 0 if cells is None else int(cells[2].sum())


def disc_mean_gray(img: GrayImage, disc: Disc) -> float:
    """Average gray value over the disc's pixels (1.0 if the disc is empty)."""
    if disc.r < RADIUS_FLOOR:
        return 1.0
    total = disc_pixel_count(disc)
    if total == 0:
        return 1.0
    return gray_mass(img, disc) / total


def stamp_disc(bits: np.ndarray, disc: Disc, value: bool = True) -> None:
    """Set mask bits for the in-bounds pixels of a disc (in place)."""
    h, w = bits.shape
    cells = _bbox_membership(disc)
    if cells is None:
        return
    ps, qs, inside = cells
    sel_p = (ps >= 0) & (ps < w)
    sel_q = (qs >= 0) & (qs < h)
    if not sel_p.any() or not sel_q.any():
        return
    sub = inside[sel_q][:, sel_p]
    region = bits[qs[sel_q][0]:qs[sel_q][-1] + 1, ps[sel_p][0]:ps[sel_p][-1] + 1]
    region[sub] = value


def render_centers(xs, ys, rs, bounds: Bounds) -> BinaryMask:
    """Union of discs at the given centers/radii as a binary mask."""
    width, height = bounds
    bits = np.zeros((height, width), dtype=bool)
    for x, y, r in zip(np.ravel(xs), np.ravel(ys), np.ravel(rs)):
        stamp_disc(bits, Disc(float(x), float(y), float(r)))
    return BinaryMask(bits)


def render_stroke(
    curve: SplineCurve,
    samples_per_interval: int = DEFAULT_SAMPLES_PER_INTERVAL,
    bounds: Bounds = (0, 0),
) -> BinaryMask:
    """Rasterize the swept-disc stroke of a curve over the image bounds."""
    if samples_per_interval < 1:
        raise InputError("samples_per_interval must be >= 1")
    n = curve.n
    ts = np.linspace(0.0, float(n), n * samples_per_interval + 1)
    vals = eval_curve(curve, ts)
    return render_centers(vals[:, 0], vals[:, 1], vals[:, 2], bounds)

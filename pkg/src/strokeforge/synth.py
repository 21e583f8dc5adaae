"""Synthetic ground-truth strokes, degradation operators and quality scoring.

The generator draws parametric shapes (line, arc, s_curve, corner) as dense
center/radius samples, rasterizes the ground-truth mask, and derives the
clean image as its complement. Degradation erases a contiguous parameter
window, adds clipped Gaussian noise and stamps dark blotches, all driven by
one seed. Scoring reports mask IoU and the Hausdorff distance between
morphological skeletons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff
from skimage.morphology import skeletonize

from .errors import InputError
from .image_io import BinaryMask, GrayImage
from .stroke import Disc, render_centers, stamp_disc

SHAPES = ("line", "arc", "s_curve", "corner")

RadiusProfile = Union[float, Tuple[float, float]]

# Parameter fractions where each shape is naturally sampled for restoration.
BASE_SAMPLE_FRACTIONS = {
    "line": (0.0, 1.0),
    "arc": (0.0, 0.5, 1.0),
    "s_curve": (0.0, 0.25, 0.5, 0.75, 1.0),
    "corner": (0.0, 0.5, 1.0),
}


@dataclass(frozen=True)
class SyntheticStroke:
    shape: str
    xs: np.ndarray
    ys: np.ndarray
    rs: np.ndarray
    image: GrayImage
    mask: BinaryMask

    @property
    def size(self) -> Tuple[int, int]:
        return self.mask.width, self.mask.height

    def point_at(self, fraction: float) -> Tuple[float, float]:
        """Ground-truth center at a parameter fraction in [0, 1]."""
        i = int(round(np.clip(fraction, 0.0, 1.0) * (len(self.xs) - 1)))
        return float(self.xs[i]), float(self.ys[i])


def _canonical_path(shape: str, u: np.ndarray):
    """Shape path in a canonical frame, later fitted into the image box.

    The s-curve amplitude is kept moderate (an eighth of the span): humps
    deeper than a pen diameter away from any sample are invisible to the
    coverage gradient and cannot be recovered from sparse samples.
    """
    if shape == "line":
        return u, np.full_like(u, 0.5)
    if shape == "arc":
        ang = np.deg2rad(210.0 + 120.0 * u)
        return np.cos(ang), np.sin(ang)
    if shape == "s_curve":
        return u, 0.5 + 0.125 * np.sin(2.0 * np.pi * u)
    if shape == "corner":
        ys = np.where(u <= 0.5, 2.0 * u, 2.0 - 2.0 * u)
        return u.copy(), ys
    raise InputError(f"unknown shape {shape!r}; expected one of {SHAPES}")


def _shape_centers(shape: str, size: Tuple[int, int], margin: float):
    """Canonical path mapped into the margin box with a uniform scale."""
    w, h = size
    u = np.linspace(0.0, 1.0, 4096)
    xs, ys = _canonical_path(shape, u)
    span_x = max(float(xs.max() - xs.min()), 1e-12)
    span_y = max(float(ys.max() - ys.min()), 1e-12)
    box_w = w - 1 - 2 * margin
    box_h = h - 1 - 2 * margin
    scale = min(box_w / span_x, box_h / max(span_y, span_x * 0.25))
    xs = (xs - xs.min()) * scale
    ys = (ys - ys.min()) * scale
    xs += margin + (box_w - xs.max()) / 2.0
    ys += margin + (box_h - ys.max()) / 2.0
    if shape == "line":
        ys = np.floor(ys) + 0.5  # half-integer row: raster band width is even
    return xs, ys


def _radius_profile(profile: RadiusProfile, count: int) -> np.ndarray:
    if isinstance(profile, (int, float)):
        rs = np.full(count, float(profile))
    else:
        r0, r1 = profile
        rs = np.linspace(float(r0), float(r1), count)
    if np.any(rs <= 0):
        raise InputError("radius profile must stay positive")
    return rs


def generate(
    shape: str,
    radius: RadiusProfile = 8.0,
    size: Tuple[int, int] = (256, 256),
    seed: int = 0,
) -> SyntheticStroke:
    """Build a ground-truth stroke; deterministic, independent of the seed.

    The seed parameter exists for call-site symmetry with ``degrade``, which
    is where randomness actually enters.
    """
    del seed
    rs_probe = _radius_profile(radius, 2)
    margin = float(np.max(rs_probe)) + 4.0
    w, h = size
    if w - 2 * margin < 8 or h - 2 * margin < 8:
        raise InputError("image too small for the shape at this radius")
    xs, ys = _shape_centers(shape, size, margin)
    length = float(np.sum(np.hypot(np.diff(xs), np.diff(ys))))
    if length <= 0:
        raise InputError("degenerate zero-length shape")
    rs = _radius_profile(radius, len(xs))
    if (
        xs.min() - rs.max() < -0.5
        or ys.min() - rs.max() < -0.5
        or xs.max() + rs.max() > w - 0.5
        or ys.max() + rs.max() > h - 0.5
    ):
        raise InputError("shape exceeds image bounds")
    mask = render_centers(xs, ys, rs, (w, h))
    image = GrayImage(1.0 - mask.bits.astype(float))
    return SyntheticStroke(shape, xs, ys, rs, image, mask)


def erase_window(erase_frac: float, seed: int) -> Tuple[float, float]:
    """Deterministic parameter window erased by ``degrade`` for this seed."""
    if not 0.0 <= erase_frac < 1.0:
        raise InputError("erase_frac must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    t0 = float(rng.uniform(0.15, max(0.15, 0.85 - erase_frac)))
    return t0, t0 + erase_frac


def degrade(
    stroke: SyntheticStroke,
    erase_frac: float = 0.2,
    noise_sigma: float = 0.05,
    blotches: int = 3,
    seed: int = 0,
    erase_start: Optional[float] = None,
) -> GrayImage:
    """Damage the clean image: erase a stroke window, add noise, stamp blotches.

    Deterministic per seed; with all-zero parameters it returns the clean
    pixels bit-exactly. ``erase_start`` overrides the seeded window position
    (its span is still erase_frac).
    """
    rng = np.random.default_rng(seed)
    t0 = float(rng.uniform(0.15, max(0.15, 0.85 - erase_frac))) if erase_frac >= 0 else 0.0
    if erase_start is not None:
        t0 = float(erase_start)
    px = stroke.image.pixels.copy()
    if erase_frac > 0:
        t1 = t0 + erase_frac
        # Partition stroke pixels by the parameter of their nearest center:
        # the erased share of the mask then matches the parameter fraction.
        qs, ps = np.nonzero(stroke.mask.bits)
        centers = np.stack([stroke.xs, stroke.ys], axis=1)
        tree = cKDTree(centers)
        _, nearest = tree.query(np.stack([ps, qs], axis=1).astype(float))
        u = nearest / (len(stroke.xs) - 1)
        erased = (u >= t0) & (u <= t1)
        px[qs[erased], ps[erased]] = 1.0
    if noise_sigma > 0:
        px = np.clip(px + rng.normal(0.0, noise_sigma, size=px.shape), 0.0, 1.0)
    for _ in range(blotches):
        bx = float(rng.uniform(0, stroke.mask.width - 1))
        by = float(rng.uniform(0, stroke.mask.height - 1))
        br = float(rng.uniform(4.0, 10.0))
        dark = float(rng.uniform(0.05, 0.3))
        blob = np.zeros_like(px, dtype=bool)
        stamp_disc(blob, Disc(bx, by, br))
        px[blob] = dark
    return GrayImage(px)


def _skeleton_points(bits: np.ndarray) -> np.ndarray:
    skel = skeletonize(bits)
    qs, ps = np.nonzero(skel)
    return np.stack([ps, qs], axis=1).astype(float)


def score(result: BinaryMask, truth: BinaryMask) -> Tuple[float, float]:
    """(IoU, skeleton Hausdorff distance in px) between two masks."""
    if result.bits.shape != truth.bits.shape:
        raise InputError("mask dimensions differ")
    a, b = result.bits, truth.bits
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0, 0.0
    iou = np.count_nonzero(a & b) / union
    pa, pb = _skeleton_points(a), _skeleton_points(b)
    if len(pa) == 0 and len(pb) == 0:
        return iou, 0.0
    if len(pa) == 0 or len(pb) == 0:
        return iou, float("inf")
    forward = directed_hausdorff(pa, pb)[0]
    backward = directed_hausdorff(pb, pa)[0]
    return iou, float(max(forward, backward))


@dataclass(frozen=True)
class BenchCase:
    name: str
    shape: str
    radius: RadiusProfile
    size: Tuple[int, int]
    erase_frac: float
    noise_sigma: float
    blotches: int
    seed: int

    @property
    def degradation(self) -> str:
        return f"erase{self.erase_frac:g}_noise{self.noise_sigma:g}_blotch{self.blotches}"


DEFAULT_SUITE = (
    BenchCase("line_clean", "line", 8.0, (256, 256), 0.0, 0.0, 0, 101),
    BenchCase("line_damaged", "line", 8.0, (256, 256), 0.15, 0.05, 2, 102),
    BenchCase("arc_damaged", "arc", 7.0, (256, 256), 0.15, 0.05, 1, 103),
    BenchCase("s_curve_gap", "s_curve", 8.0, (288, 256), 0.2, 0.05, 0, 104),
)


def suite_cases(name: str = "default") -> Sequence[BenchCase]:
    if name != "default":
        raise InputError(f"unknown suite {name!r}")
    return DEFAULT_SUITE


def sample_fractions(case: BenchCase) -> list:
    """Shape base fractions plus the erased window's ends.

    Stroke ends and gap ends are mandatory; interior base fractions yield to
    them when closer than 0.05 so the produced node layout stays non-cramped.
    """
    mandatory = {0.0, 1.0}
    if case.erase_frac > 0:
        t0, t1 = erase_window(case.erase_frac, case.seed)
        mandatory |= {t0, t1}
    out = sorted(mandatory)
    for f in BASE_SAMPLE_FRACTIONS[case.shape]:
        if all(abs(f - g) >= 0.05 for g in out):
            out.append(f)
    return sorted(out)


def case_points(case: BenchCase, stroke: SyntheticStroke):
    """Restoration sample points for a bench case, tagged by role."""
    from .pipeline import SamplePoint, SamplePointSet

    fractions = sample_fractions(case)
    gap = erase_window(case.erase_frac, case.seed) if case.erase_frac > 0 else None
    pts = []
    for f in fractions:
        x, y = stroke.point_at(f)
        kind, r = None, None
        if f in (fractions[0], fractions[-1]):
            kind = "endpoint"
        elif gap is not None and min(abs(f - gap[0]), abs(f - gap[1])) < 1e-9:
            # No ink to probe at a gap point: the operator supplies the width
            # read off the adjacent intact stroke, pinning the radius there.
            kind = "gap"
            i = int(round(f * (len(stroke.rs) - 1)))
            r = float(stroke.rs[i])
        elif case.shape == "corner" and abs(f - 0.5) < 1e-9:
            kind = "curvature-extremum"
        else:
            kind = "densify"
        pts.append(SamplePoint(x=x, y=y, r=r, kind=kind))
    return SamplePointSet(pts)


def run_bench(
    suite: str = "default",
    out_csv=None,
    artifacts_dir=None,
    params=None,
    config=None,
):
    """Run the benchmark suite; returns one result row per case.

    Writes the results CSV when out_csv is given and, when artifacts_dir is
    set, the per-case mask PNG, spline JSON and energy-trace CSV.
    """
    import time
    from pathlib import Path

    from .image_io import histogram_stretch, save_mask
    from .pipeline import restore, trace_csv_text
    from .spline import save_spline

    if params is None:
        from .energy import EnergyParams

        params = EnergyParams()
    if config is None:
        from .descent import DescentConfig

        config = DescentConfig()

    rows = []
    for case in suite_cases(suite):
        stroke = generate(case.shape, case.radius, case.size, case.seed)
        damaged = degrade(
            stroke, case.erase_frac, case.noise_sigma, case.blotches, case.seed
        )
        enhanced = histogram_stretch(damaged)
        points = case_points(case, stroke)
        started = time.perf_counter()
        result = restore(enhanced, points, params, config)
        runtime = time.perf_counter() - started
        iou, hausdorff = score(result.mask, stroke.mask)
        rows.append(
            {
                "case": case.name,
                "shape": case.shape,
                "degradation": case.degradation,
                "iou": iou,
                "hausdorff": hausdorff,
                "runtime": runtime,
            }
        )
        if artifacts_dir is not None:
            adir = Path(artifacts_dir)
            adir.mkdir(parents=True, exist_ok=True)
            save_mask(result.mask, adir / f"{case.name}_mask.png")
            save_spline(result.curve, adir / f"{case.name}_spline.json")
            (adir / f"{case.name}_trace.csv").write_text(trace_csv_text(result.trace))
    if out_csv is not None:
        header = "case,shape,degradation,iou,hausdorff,runtime"
        lines = [header]
        for row in rows:
            lines.append(
                f"{row['case']},{row['shape']},{row['degradation']},"
                f"{row['iou']!r},{row['hausdorff']!r},{row['runtime']:.3f}"
            )
        Path(out_csv).write_text("\n".join(lines) + "\n")
    return rows

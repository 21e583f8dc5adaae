"""End-to-end stroke restoration: point intake, node layout, descent, output.

Sample point k becomes node 2k, with one free node between consecutive
samples, so k points span nodes 0 .. 2(k-1). The initial curve interpolates
the sampled polyline (free nodes at segment midpoints) through a natural
spline solve; descent then evolves the coefficients while the pinned nodes
hold their values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, List, Optional, Sequence, Tuple, Union

import numpy as np

from .descent import DescentConfig, ProgressCallback, run_descent
from .energy import EnergyBreakdown, EnergyParams
from .errors import InputError
from .image_io import BinaryMask, GrayImage
from .spline import ConstraintSet, NodeConstraint, SplineCurve, curve_from_node_targets
from .stroke import DEFAULT_SAMPLES_PER_INTERVAL, Disc, disc_mean_gray, render_stroke

POINT_KINDS = ("endpoint", "intersection", "curvature-extremum", "gap", "densify")

# A probe disc is accepted while its mean gray stays at or below this level.
PROBE_MEAN_GRAY = 0.3


@dataclass(frozen=True)
class SamplePoint:
    x: float
    y: float
    r: Optional[float] = None
    kind: Optional[str] = None


@dataclass
class SamplePointSet:
    points: List[SamplePoint] = field(default_factory=list)

    def validate(self, bounds: Optional[Tuple[int, int]] = None) -> None:
        if len(self.points) < 2:
            raise InputError("at least 2 points are required")
        for p in self.points:
            if p.kind is not None and p.kind not in POINT_KINDS:
                raise InputError(f"unknown point kind {p.kind!r}")
            if p.r is not None and p.r <= 0:
                raise InputError("explicit point radius must be positive")
            if bounds is not None:
                w, h = bounds
                if not (0 <= p.x <= w - 1 and 0 <= p.y <= h - 1):
                    raise InputError(f"point ({p.x}, {p.y}) outside the image")

    def to_dict(self) -> dict:
        pts = []
        for p in self.points:
            d = {"x": p.x, "y": p.y}
            if p.r is not None:
                d["r"] = p.r
            if p.kind is not None:
                d["kind"] = p.kind
            pts.append(d)
        return {"points": pts}


def points_from_dict(doc: dict) -> SamplePointSet:
    try:
        raw = doc["points"]
    except (KeyError, TypeError) as exc:
        raise InputError("points document must carry a 'points' list") from exc
    pts = []
    for entry in raw:
        try:
            pts.append(
                SamplePoint(
                    x=float(entry["x"]),
                    y=float(entry["y"]),
                    r=float(entry["r"]) if "r" in entry and entry["r"] is not None else None,
                    kind=entry.get("kind"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed point entry {entry!r}") from exc
    return SamplePointSet(pts)


def load_points(source: Union[str, Path, IO[str]]) -> SamplePointSet:
    try:
        if hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source) as fh:
                doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read points JSON: {exc}") from exc
    return points_from_dict(doc)


@dataclass(frozen=True)
class NodeLayout:
    node_count: int
    constrained: Tuple[int, ...]

    @property
    def n(self) -> int:
        return self.node_count - 1


def layout_nodes(points: SamplePointSet) -> NodeLayout:
    """Node layout with one free node between consecutive sample points."""
    points.validate()
    k = len(points.points)
    return NodeLayout(node_count=2 * k - 1, constrained=tuple(2 * i for i in range(k)))


def probe_radius(img: GrayImage, x: float, y: float, params: EnergyParams) -> float:
    """Largest integer radius whose disc still reads mostly ink.

    Falls back to max(r_min, 5) where no radius qualifies, e.g. on sample
    points deliberately placed in gaps with no ink trace.
    """
    for r in np.arange(np.floor(params.r_max), 0.0, -1.0):
        if disc_mean_gray(img, Disc(x, y, float(r))) <= PROBE_MEAN_GRAY:
            return float(r)
    return max(params.r_min, 5.0)


def resolve_radii(img: GrayImage, points: SamplePointSet, params: EnergyParams) -> List[float]:
    """Per-point initial radii: explicit values win, otherwise image probing."""
    out = []
    for p in points.points:
        r = p.r if p.r is not None else probe_radius(img, p.x, p.y, params)
        out.append(float(np.clip(r, params.r_min, params.r_max)))
    return out


def initial_spline(
    points: SamplePointSet,
    layout: NodeLayout,
    radii: Sequence[float],
    r_bounds: Optional[Tuple[float, float]] = None,
) -> SplineCurve:
    """Natural-spline interpolant of the sampled polyline.

    Sampled nodes take the user's points; free nodes take segment midpoints,
    in all three channels. Radius coefficients are clamped into r_bounds
    when given.
    """
    pts = points.points
    if len(radii) != len(pts):
        raise InputError("one radius per sample point is required")
    targets = np.zeros((layout.node_count, 3))
    for k, p in enumerate(pts):
        targets[2 * k] = (p.x, p.y, radii[k])
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        targets[2 * k + 1] = (
            (a.x + b.x) / 2.0,
            (a.y + b.y) / 2.0,
            (radii[k] + radii[k + 1]) / 2.0,
        )
    curve = curve_from_node_targets(targets)
    if r_bounds is not None:
        cps = curve.control_points.copy()
        cps[:, 2] = np.clip(cps[:, 2], r_bounds[0], r_bounds[1])
        curve = SplineCurve(cps, curve.node_count)
    return curve


def build_constraints(points: SamplePointSet, layout: NodeLayout) -> ConstraintSet:
    """Pin x and y at every sampled node; pin r only where given explicitly."""
    entries = []
    for k, p in enumerate(points.points):
        values = {"x": float(p.x), "y": float(p.y)}
        if p.r is not None:
            values["r"] = float(p.r)
        entries.append(NodeConstraint(layout.constrained[k], values))
    return ConstraintSet(entries)


@dataclass(frozen=True)
class RestorationResult:
    curve: SplineCurve
    trace: List[EnergyBreakdown]
    mask: BinaryMask
    config: dict


def restore(
    img: GrayImage,
    points: SamplePointSet,
    params: EnergyParams = EnergyParams(),
    config: DescentConfig = DescentConfig(),
    samples_per_interval: int = DEFAULT_SAMPLES_PER_INTERVAL,
    on_iteration: Optional[ProgressCallback] = None,
) -> RestorationResult:
    """Full restoration of one stroke from user-sampled points."""
    points.validate((img.width, img.height))
    layout = layout_nodes(points)
    radii = resolve_radii(img, points, params)
    curve0 = initial_spline(points, layout, radii, (config.r_min, config.r_max))
    constraints = build_constraints(points, layout)
    state, trace = run_descent(img, curve0, constraints, params, config, on_iteration)
    mask = render_stroke(state.curve, samples_per_interval, (img.width, img.height))
    echo = {
        "points": points.to_dict()["points"],
        "initial_radii": radii,
        "energy": {
            "c1": params.c1,
            "c2": params.c2,
            "c3": params.c3,
            "alpha": params.alpha,
            "epsilon": params.epsilon,
            "r_min": params.r_min,
            "r_max": params.r_max,
            "quad_samples": params.quad_samples,
            "gray_scale": params.gray_scale,
        },
        "descent": {
            "initial_step": config.initial_step,
            "decay": config.decay,
            "fd_step": config.fd_step,
            "max_iterations": config.max_iterations,
            "early_stop_rel": config.early_stop_rel,
        },
        "samples_per_interval": samples_per_interval,
    }
    return RestorationResult(curve=state.curve, trace=trace, mask=mask, config=echo)


def merge_masks(masks: Sequence[BinaryMask]) -> BinaryMask:
    """Pixelwise union; all masks must share dimensions."""
    if not masks:
        raise InputError("no masks to merge")
    bits = masks[0].bits.copy()
    for m in masks[1:]:
        if m.bits.shape != bits.shape:
            raise InputError("mask dimensions differ")
        bits |= m.bits
    return BinaryMask(bits)


def overlay_strokes(results: Sequence[RestorationResult]) -> BinaryMask:
    """Union of several restored strokes, e.g. the strokes of one character."""
    return merge_masks([r.mask for r in results])


TRACE_HEADER = "iter,f_total,f_fid_s,f_fid_r,f_curv"


def trace_csv_text(trace: Sequence[EnergyBreakdown]) -> str:
    lines = [TRACE_HEADER]
    for i, bd in enumerate(trace):
        lines.append(
            f"{i},{bd.f_total!r},{bd.f_fidelity_s!r},{bd.f_fidelity_r!r},{bd.f_curvature!r}"
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: Sequence[EnergyBreakdown], target: Union[str, Path, IO[str]]) -> None:
    text = trace_csv_text(trace)
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)

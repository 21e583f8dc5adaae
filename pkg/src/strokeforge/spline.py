"""Cubic B-spline stroke curves on uniform integer nodes.

A curve carries three channels (x, y, r): pen-center coordinates and pen
radius, all in pixels. With nodes t_0 .. t_n at consecutive integers the
curve is determined by n+3 coefficient triples c_{-1} .. c_{n+1}; the value
at an integer node t_i is the stencil (1/6) c_{i-1} + (2/3) c_i + (1/6) c_{i+1}.

Interpolation constraints pin node values. Coefficient perturbations that
leave every pinned node value unchanged form a linear subspace;
`constraint_nullspace` returns an explicit basis of it, one vector per free
coefficient, built by eliminating the stencil's center coefficient of each
constrained node. For a constraint with no neighbors sharing coefficients
the basis reduces to the two-entry vectors (1, -1/4, 0) and (0, -1/4, 1)
over the local coefficient triple.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .errors import ConstraintSpacingError, InputError, ParameterRangeError

CHANNELS = ("x", "y", "r")

# Squared-speed floor below which curvature is reported as zero.
SPEED_FLOOR_SQ = 1e-8

# Tolerance when checking the parameter domain; grids built by linspace may
# overshoot the endpoint by a few ulp.
_DOMAIN_EPS = 1e-9


@dataclass(frozen=True)
class SplineCurve:
    """Uniform cubic B-spline with coefficient triples (x, y, r).

    ``control_points`` has shape (n+3, 3); row a holds coefficient c_{a-1},
    so rows run j = -1 .. n+1. ``node_count`` is n+1.
    """

    control_points: np.ndarray
    node_count: int

    def __post_init__(self):
        cps = np.asarray(self.control_points, dtype=float)
        if cps.ndim != 2 or cps.shape[1] != 3:
            raise InputError("control points must be an (n+3, 3) array")
        if self.node_count < 2:
            raise InputError("a curve needs at least two nodes")
        if cps.shape[0] != self.node_count + 2:
            raise InputError(
                f"{self.node_count} nodes require {self.node_count + 2} "
                f"control points, got {cps.shape[0]}"
            )
        object.__setattr__(self, "control_points", cps)

    @property
    def n(self) -> int:
        """Index of the last node; the parameter domain is [0, n]."""
        return self.node_count - 1

    def flat_coefficients(self) -> np.ndarray:
        """Row-major flattening (c_{-1}^x, c_{-1}^y, c_{-1}^r, c_0^x, ...)."""
        return self.control_points.reshape(-1).copy()

    def with_flat_coefficients(self, flat: np.ndarray) -> "SplineCurve":
        cps = np.asarray(flat, dtype=float).reshape(self.node_count + 2, 3)
        return SplineCurve(cps, self.node_count)


@dataclass(frozen=True)
class NodeConstraint:
    """Pinned value(s) at one node: channel name -> target, e.g. {"x": 12.5}."""

    node: int
    values: dict

    @property
    def channels(self) -> tuple:
        return tuple(ch for ch in CHANNELS if ch in self.values)


@dataclass
class ConstraintSet:
    """Interpolation constraints, at most one entry per node."""

    entries: list = field(default_factory=list)

    def validate(self, n: int) -> None:
        """Check node ranges, duplicates, channels and the spacing rule."""
        seen = set()
        for e in self.entries:
            if not 0 <= e.node <= n:
                raise InputError(f"constrained node {e.node} outside [0, {n}]")
            if e.node in seen:
                raise InputError(f"duplicate constraint at node {e.node}")
            seen.add(e.node)
            for ch in e.values:
                if ch not in CHANNELS:
                    raise InputError(f"unknown channel {ch!r}")
            if not e.values:
                raise InputError(f"constraint at node {e.node} pins no channel")
        nodes = sorted(seen)
        for a, b in zip(nodes, nodes[1:]):
            if b - a < 2:
                raise ConstraintSpacingError(a, b)

    def nodes(self) -> list:
        """Sorted node indices constrained in any channel."""
        return sorted(e.node for e in self.entries)

    def channel_nodes(self, channel: str) -> list:
        return sorted(e.node for e in self.entries if channel in e.values)


def _segment_and_local(curve: SplineCurve, t) -> tuple:
    t = np.asarray(t, dtype=float)
    n = curve.n
    if np.any(t < -_DOMAIN_EPS) or np.any(t > n + _DOMAIN_EPS):
        bad = t[(t < -_DOMAIN_EPS) | (t > n + _DOMAIN_EPS)]
        raise ParameterRangeError(f"parameter {float(np.ravel(bad)[0])} outside [0, {n}]")
    t = np.clip(t, 0.0, float(n))
    seg = np.minimum(np.floor(t).astype(int), n - 1)
    return seg, t - seg


def _weights(s: np.ndarray, order: int) -> np.ndarray:
    """Segment-local basis weights for c_{i-1}..c_{i+2}; order 0, 1 or 2."""
    s = np.asarray(s, dtype=float)
    s2 = s * s
    if order == 0:
        s3 = s2 * s
        w = [(1 - 3 * s + 3 * s2 - s3) / 6.0,
             (4 - 6 * s2 + 3 * s3) / 6.0,
             (1 + 3 * s + 3 * s2 - 3 * s3) / 6.0,
             s3 / 6.0]
    elif order == 1:
        w = [-(1 - s) ** 2 / 2.0,
             (3 * s2 - 4 * s) / 2.0,
             (-3 * s2 + 2 * s + 1) / 2.0,
             s2 / 2.0]
    elif order == 2:
        w = [1 - s, 3 * s - 2, 1 - 3 * s, s]
    else:
        raise ValueError("order must be 0, 1 or 2")
    return np.stack(w, axis=-1)


def _combine(curve: SplineCurve, t, order: int) -> np.ndarray:
    seg, s = _segment_and_local(curve, t)
    w = _weights(s, order)                      # (..., 4)
    idx = seg[..., None] + np.arange(4)         # (..., 4) rows into control_points
    return np.einsum("...k,...kc->...c", w, curve.control_points[idx])


def eval_curve(curve: SplineCurve, t) -> np.ndarray:
    """Evaluate (x, y, r) at parameter t; t may be a scalar or an array.

    Returns shape (3,) for scalar t, (len(t), 3) otherwise.
    """
    return _combine(curve, t, 0)


def eval_derivatives(curve: SplineCurve, t) -> tuple:
    """First and second parametric derivatives: (xd, yd, rd, xdd, ydd).

    Derivatives are exact polynomials of the spline segments; the second
    derivative of the radius channel is not part of the model and is omitted.
    """
    d1 = _combine(curve, t, 1)
    d2 = _combine(curve, t, 2)
    return d1[..., 0], d1[..., 1], d1[..., 2], d2[..., 0], d2[..., 1]


def curvature(curve: SplineCurve, t) -> np.ndarray:
    """Signed curvature of the pen-center path, zero where speed collapses."""
    xd, yd, _, xdd, ydd = eval_derivatives(curve, t)
    speed_sq = xd * xd + yd * yd
    num = xd * ydd - yd * xdd
    with np.errstate(divide="ignore", invalid="ignore"):
        k = num / np.power(speed_sq, 1.5)
    return np.where(speed_sq < SPEED_FLOOR_SQ, 0.0, k)


def node_values(curve: SplineCurve, channel: str) -> np.ndarray:
    """Values at every integer node via the (1/6, 2/3, 1/6) stencil."""
    c = curve.control_points[:, CHANNELS.index(channel)]
    return (c[:-2] + 4.0 * c[1:-1] + c[2:]) / 6.0


def constraint_nullspace(constraints: ConstraintSet, n: int) -> dict:
    """Per-channel basis of coefficient directions preserving all constraints.

    For each channel the constraint matrix has one row per pinned node i with
    the stencil (1/6, 2/3, 1/6) on coefficients c_{i-1}, c_i, c_{i+1}. The
    center coefficient c_i is unique to its row (the spacing rule guarantees
    it), so eliminating it row by row yields one basis vector per remaining
    coefficient a: the unit direction e_a, with -1/4 added at the center of
    every row in which a appears as an edge coefficient. Vectors are
    normalized to unit Euclidean length.

    Returns {channel: array of shape (n+3 - m_channel, n+3)} with rows
    ordered by free coefficient index.
    """
    constraints.validate(n)
    ncoef = n + 3
    basis = {}
    for ch in CHANNELS:
        nodes = constraints.channel_nodes(ch)
        pivots = {node + 1 for node in nodes}           # array index of c_node
        correction = {}                                 # edge index -> pivot indices
        for node in nodes:
            for edge in (node, node + 2):               # indices of c_{node-1}, c_{node+1}
                correction.setdefault(edge, []).append(node + 1)
        rows = []
        for a in range(ncoef):
            if a in pivots:
                continue
            v = np.zeros(ncoef)
            v[a] = 1.0
            for p in correction.get(a, ()):
                v[p] = -0.25
            rows.append(v / np.linalg.norm(v))
        basis[ch] = np.array(rows) if rows else np.empty((0, ncoef))
    return basis


def curve_to_dict(curve: SplineCurve) -> dict:
    return {
        "nodes": curve.node_count,
        "control_points": [[float(v) for v in row] for row in curve.control_points],
    }


def curve_from_dict(doc: dict) -> SplineCurve:
    try:
        nodes = int(doc["nodes"])
        cps = np.asarray(doc["control_points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed spline document: {exc}") from exc
    return SplineCurve(cps, nodes)


def save_spline(curve: SplineCurve, target: Union[str, Path, IO[str]]) -> None:
    """Write the spline JSON document; floats keep full double precision."""
    doc = curve_to_dict(curve)
    if hasattr(target, "write"):
        json.dump(doc, target)
    else:
        with open(target, "w") as fh:
            json.dump(doc, fh)


def load_spline(source: Union[str, Path, IO[str]]) -> SplineCurve:
    try:
        if hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source) as fh:
                doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spline JSON: {exc}") from exc
    return curve_from_dict(doc)


def constant_curve(node_count: int, x: float, y: float, r: float) -> SplineCurve:
    """Curve whose every coefficient is (x, y, r); evaluates to that triple."""
    cps = np.tile([x, y, r], (node_count + 2, 1))
    return SplineCurve(cps, node_count)


def curve_from_node_targets(targets: np.ndarray) -> SplineCurve:
    """Solve for coefficients so the curve interpolates targets at every node.

    ``targets`` has one (x, y, r) row per node. The n+1 stencil equations are
    closed with natural end conditions (vanishing second derivative), i.e.
    c_{-1} - 2 c_0 + c_1 = 0 and symmetrically at the far end. The system is
    strictly diagonally dominant after eliminating the end rows, so the dense
    solve is safe.
    """
    targets = np.asarray(targets, dtype=float)
    nn = targets.shape[0]                # node count n+1
    ncoef = nn + 2
    a = np.zeros((ncoef, ncoef))
    b = np.zeros((ncoef, 3))
    a[0, 0:3] = (1.0, -2.0, 1.0)
    for i in range(nn):
        a[i + 1, i:i + 3] = (1 / 6, 2 / 3, 1 / 6)
        b[i + 1] = targets[i]
    a[-1, -3:] = (1.0, -2.0, 1.0)
    cps = np.linalg.solve(a, b)
    return SplineCurve(cps, nn)


def iter_entries(constraints: ConstraintSet) -> Iterable[NodeConstraint]:
    return iter(constraints.entries)

"""Three-term stroke energy evaluated by midpoint quadrature in the curve parameter.

The total cost of a candidate stroke curve against an image is

    F = c1 * integral( gray_scale * G(t) / r(t)^2 )         coverage penalty
      + c2 * integral( r(t)^-alpha )                        radius incentive
      + c3 * integral( |K(t)| outside pinned-node windows ) bending penalty

where G(t) is the gray mass under the pen disc at t and K the skeleton
curvature. The coverage integrand is measured in 8-bit gray levels
(gray_scale = 255 by default): the reference weights c1 = 2, c2 = 2000 are
calibrated for that scale, and with normalized [0, 1] values the radius
incentive would dominate at any radius. Bending is ignored inside an
epsilon-window around each pinned node so deliberately sampled corners survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericError
from .image_io import GrayImage
from .spline import ConstraintSet, SplineCurve, curvature, eval_curve
from .stroke import Disc, gray_mass

GRAY_LEVEL_SCALE = 255.0


@dataclass(frozen=True)
class EnergyParams:
    """Weights and knobs of the stroke energy.

    c1, c2, c3 balance coverage, radius growth and bending; alpha is the
    radius-incentive exponent (0.5 is robust against partly erased ink,
    larger values pull the optimum radius tighter to the ink boundary).
    epsilon is the half-width, in node units, of the bending exemption
    around pinned nodes.
    """

    c1: float = 2.0
    c2: float = 2000.0
    c3: float = 50.0
    alpha: float = 0.5
    epsilon: float = 0.125
    r_min: float = 3.0
    r_max: float = 50.0
    quad_samples: int = 32
    gray_scale: float = GRAY_LEVEL_SCALE

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) < 0:
            raise InputError("energy weights must be nonnegative")
        if self.alpha <= 0:
            raise InputError("alpha must be positive")
        if not 0 < self.epsilon < 0.5:
            raise InputError("epsilon must lie in (0, 0.5)")
        if not 0 < self.r_min < self.r_max:
            raise InputError("radius bounds must satisfy 0 < r_min < r_max")
        if self.quad_samples < 2:
            raise InputError("quad_samples must be >= 2")
        if self.gray_scale <= 0:
            raise InputError("gray_scale must be positive")


@dataclass(frozen=True)
class EnergyBreakdown:
    f_total: float
    f_fidelity_s: float
    f_fidelity_r: float
    f_curvature: float

    def as_dict(self) -> dict:
        return {
            "f_total": self.f_total,
            "f_fid_s": self.f_fidelity_s,
            "f_fid_r": self.f_fidelity_r,
            "f_curv": self.f_curvature,
        }


def quad_grid(n: int, samples_per_interval: int):
    """Midpoint-rule abscissae over [0, n] and the common weight."""
    count = n * samples_per_interval
    ts = (np.arange(count) + 0.5) / samples_per_interval
    return ts, 1.0 / samples_per_interval


def energy_fidelity_s(img: GrayImage, curve: SplineCurve, params: EnergyParams) -> float:
    """Coverage penalty: scaled gray mass under the pen disc, radius-normalized."""
    ts, dt = quad_grid(curve.n, params.quad_samples)
    vals = eval_curve(curve, ts)
    bounds_free_mass = np.array(
        [gray_mass(img, Disc(x, y, r)) for x, y, r in vals]
    )
    r_sq = vals[:, 2] ** 2
    if np.any(r_sq <= 0):
        raise NumericError("nonpositive radius on the quadrature grid")
    return params.c1 * float(np.sum(params.gray_scale * bounds_free_mass / r_sq)) * dt


def energy_fidelity_r(curve: SplineCurve, params: EnergyParams) -> float:
    """Radius incentive: integral of r^-alpha, lower for wider pens."""
    ts, dt = quad_grid(curve.n, params.quad_samples)
    r = eval_curve(curve, ts)[:, 2]
    if np.any(r <= 0):
        raise NumericError("nonpositive radius on the quadrature grid")
    return params.c2 * float(np.sum(r ** (-params.alpha))) * dt


def curvature_keep_mask(ts: np.ndarray, constrained_nodes, epsilon: float) -> np.ndarray:
    """Quadrature points outside every pinned-node exemption window."""
    keep = np.ones_like(ts, dtype=bool)
    for node in constrained_nodes:
        keep &= np.abs(ts - node) > epsilon
    return keep


def energy_curvature(curve: SplineCurve, constraints: ConstraintSet, params: EnergyParams) -> float:
    """Bending penalty: integral of |K| skipping pinned-node windows."""
    ts, dt = quad_grid(curve.n, params.quad_samples)
    keep = curvature_keep_mask(ts, constraints.nodes(), params.epsilon)
    if not np.any(keep):
        return 0.0
    k = curvature(curve, ts[keep])
    return params.c3 * float(np.sum(np.abs(k))) * dt


def energy_total(
    img: GrayImage,
    curve: SplineCurve,
    constraints: ConstraintSet,
    params: EnergyParams,
) -> EnergyBreakdown:
    fs = energy_fidelity_s(img, curve, params)
    fr = energy_fidelity_r(curve, params)
    fk = energy_curvature(curve, constraints, params)
    return EnergyBreakdown(fs + fr + fk, fs, fr, fk)

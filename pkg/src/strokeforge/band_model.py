"""Closed-form fidelity energy of a disc sliding along a straight ink band.

For a pen disc of radius r centered on the axis of a black band of
half-width R, the white mass inside the disc is the two circular segments
protruding past the band: (theta - sin theta) * r^2 with
theta = 2 * arccos(R / r), and zero while the disc stays inside the band.
The resulting one-dimensional energy

    f(r) = c1 * (theta - sin theta) + c2 * r^-alpha        (r >= R)
    f(r) = c2 * r^-alpha                                   (r <  R)

has its minimum a little above R; how tightly depends on alpha. The profile
and its derivative are cheap, exact functions used to validate the image
pipeline's behavior and to justify the default exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class BandModel:
    """Straight band of half-width (writing radius) R with fidelity weights."""

    R: float
    c1: float = 1.0
    c2: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.R <= 0:
            raise InputError("writing radius must be positive")
        if self.c1 <= 0 or self.c2 <= 0:
            raise InputError("weights must be positive")
        if self.alpha <= 0:
            raise InputError("alpha must be positive")


def excess_area(model: BandModel, r):
    """White area of the disc protruding past the band; 0 while r < R."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InputError("radius must be positive")
    ratio = np.clip(model.R / np.maximum(r, model.R), -1.0, 1.0)
    theta = 2.0 * np.arccos(ratio)
    seg = (theta - np.sin(theta)) * r * r
    out = np.where(r < model.R, 0.0, seg)
    return out if out.ndim else float(out)


def energy_profile(model: BandModel, r):
    """Fidelity energy per unit parameter length at disc radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InputError("radius must be positive")
    out = model.c2 * r ** (-model.alpha) + model.c1 * excess_area(model, r) / (r * r)
    return out if out.ndim else float(out)


def profile_derivative(model: BandModel, r):
    """d/dr of the energy profile; one-sided branches agree at r = R."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InputError("radius must be positive")
    power = -model.c2 * model.alpha * r ** (-model.alpha - 1.0)
    ratio_sq = np.minimum((model.R / r) ** 2, 1.0)
    coverage = 4.0 * model.c1 * model.R * np.sqrt(1.0 - ratio_sq) / (r * r)
    out = np.where(r < model.R, power, coverage + power)
    return out if out.ndim else float(out)


def profile_csv_rows(model: BandModel, r_lo: float, r_hi: float, samples: int):
    """(r, f, df/dr) triples on a uniform radius grid, for plotting."""
    if not 0 < r_lo < r_hi:
        raise InputError("need 0 < r_lo < r_hi")
    if samples < 2:
        raise InputError("need at least two samples")
    rs = np.linspace(r_lo, r_hi, samples)
    return np.stack([rs, energy_profile(model, rs), profile_derivative(model, rs)], axis=1)

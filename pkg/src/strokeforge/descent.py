"""Gradient descent over constraint-preserving directions with sign-based step decay.

Each null-space direction carries its own step size. A step estimates the
directional derivative of the energy along every direction by forward
differences, shrinks a direction's step by the decay factor whenever its
derivative changed sign since the previous iteration, then moves the
coefficients by the per-direction step times derivative. Radius
coefficients are clamped into their box after every step. Because every
update is a combination of null-space directions, pinned node values ride
along untouched for the entire run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .energy import EnergyBreakdown, EnergyParams, energy_total
from .errors import InputError, NumericError
from .image_io import GrayImage
from .spline import CHANNELS, ConstraintSet, SplineCurve, constraint_nullspace

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class DescentConfig:
    """Step-size schedule, difference step and stopping controls.

    ``initial_step`` multiplies raw directional derivatives, whose magnitude
    on document-scale images reaches a few hundred; 0.05 keeps the first
    coefficient moves within a few pixels. ``decay`` is the per-sign-flip
    multiplier in (0, 1). ``early_stop_rel`` halts once the relative drop of
    the total energy falls below it (0 disables, matching the fixed
    iteration-count protocol).
    """

    initial_step: float = 0.05
    decay: float = 0.5
    fd_step: float = 0.5
    max_iterations: int = 14
    r_min: float = 3.0
    r_max: float = 50.0
    early_stop_rel: float = 0.0

    def __post_init__(self):
        if self.initial_step <= 0:
            raise InputError("initial_step must be positive")
        if not 0.0 < self.decay < 1.0:
            raise InputError("decay must lie in (0, 1)")
        if self.fd_step <= 0:
            raise InputError("fd_step must be positive")
        if self.max_iterations < 0:
            raise InputError("max_iterations must be nonnegative")
        if not 0 < self.r_min < self.r_max:
            raise InputError("radius bounds must satisfy 0 < r_min < r_max")
        if self.early_stop_rel < 0:
            raise InputError("early_stop_rel must be nonnegative")


@dataclass(frozen=True)
class DescentState:
    curve: SplineCurve
    step_sizes: np.ndarray
    prev_derivs: np.ndarray
    iteration: int = 0


def initial_state(curve: SplineCurve, direction_count: int, config: DescentConfig) -> DescentState:
    return DescentState(
        curve=curve,
        step_sizes=np.full(direction_count, config.initial_step),
        prev_derivs=np.zeros(direction_count),
        iteration=0,
    )


def directional_derivative(
    objective: Objective, coeffs: np.ndarray, direction: np.ndarray, h: float
) -> float:
    """Forward-difference derivative along a unit direction."""
    norm = float(np.linalg.norm(direction))
    if abs(norm - 1.0) > 1e-9:
        raise InputError(f"direction must be unit length, got |v| = {norm}")
    return (objective(coeffs + h * direction) - objective(coeffs)) / h


def build_directions(constraints: ConstraintSet, n: int) -> np.ndarray:
    """Flatten the per-channel null-space bases into full coefficient space.

    Coefficients are flattened row-major as (x, y, r) per control point, so a
    channel direction lands on a stride-3 slice. Rows are ordered x-channel
    first, then y, then r, each by ascending free-coefficient index.
    """
    per_channel = constraint_nullspace(constraints, n)
    d = 3 * (n + 3)
    rows = []
    for k, ch in enumerate(CHANNELS):
        for v in per_channel[ch]:
            flat = np.zeros(d)
            flat[k::3] = v
            rows.append(flat)
    return np.array(rows)


def _clamp_radius_coefficients(flat: np.ndarray, config: DescentConfig) -> np.ndarray:
    flat = flat.copy()
    flat[2::3] = np.clip(flat[2::3], config.r_min, config.r_max)
    return flat


def descent_step(
    state: DescentState,
    objective: Objective,
    directions: np.ndarray,
    config: DescentConfig,
) -> DescentState:
    """One adaptive step: derivative probe, sign-flip decay, move, clamp."""
    if directions.shape[0] != state.step_sizes.shape[0]:
        raise InputError("direction count does not match step-size table")
    coeffs = state.curve.flat_coefficients()
    f_base = objective(coeffs)
    derivs = np.array(
        [
            (objective(coeffs + config.fd_step * v) - f_base) / config.fd_step
            for v in directions
        ]
    )
    if not np.all(np.isfinite(derivs)):
        raise NumericError("non-finite directional derivative")
    if state.iteration == 0:
        steps = state.step_sizes.copy()  # no history yet: treat signs as agreeing
    else:
        flipped = derivs * state.prev_derivs < 0.0
        steps = np.where(flipped, state.step_sizes * config.decay, state.step_sizes)
    moved = coeffs - (steps * derivs) @ directions
    moved = _clamp_radius_coefficients(moved, config)
    return DescentState(
        curve=state.curve.with_flat_coefficients(moved),
        step_sizes=steps,
        prev_derivs=derivs,
        iteration=state.iteration + 1,
    )


ProgressCallback = Callable[[int, SplineCurve, EnergyBreakdown], None]


def run_descent(
    img: GrayImage,
    curve: SplineCurve,
    constraints: ConstraintSet,
    params: EnergyParams,
    config: DescentConfig,
    on_iteration: Optional[ProgressCallback] = None,
) -> Tuple[DescentState, List[EnergyBreakdown]]:
    """Run the configured number of steps, tracing the energy breakdown.

    The returned trace holds max_iterations + 1 entries (the baseline first)
    unless early stopping trims the run.
    """
    constraints.validate(curve.n)
    directions = build_directions(constraints, curve.n)
    node_count = curve.node_count

    def objective(flat: np.ndarray) -> float:
        candidate = SplineCurve(flat.reshape(node_count + 2, 3), node_count)
        return energy_total(img, candidate, constraints, params).f_total

    state = initial_state(curve, directions.shape[0], config)
    breakdown = energy_total(img, curve, constraints, params)
    if not np.isfinite(breakdown.f_total):
        raise NumericError("initial energy is not finite")
    trace = [breakdown]
    if on_iteration is not None:
        on_iteration(0, curve, breakdown)
    for _ in range(config.max_iterations):
        state = descent_step(state, objective, directions, config)
        breakdown = energy_total(img, state.curve, constraints, params)
        if not np.isfinite(breakdown.f_total):
            raise NumericError(f"energy diverged at iteration {state.iteration}")
        trace.append(breakdown)
        if on_iteration is not None:
            on_iteration(state.iteration, state.curve, breakdown)
        prev, cur = trace[-2].f_total, trace[-1].f_total
        if config.early_stop_rel > 0:
            rel_drop = (prev - cur) / max(abs(prev), 1e-300)
            if rel_drop < config.early_stop_rel:
                break
    return state, trace

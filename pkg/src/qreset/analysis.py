"""Survival timescales, optimal restart periods, and engine comparisons.

The dissipative descriptions compress a whole restart window into a
single decay weight: propagate once over the window time, read off the
surviving norm ``P_eff``, and set ``alpha = -ln P_eff``.  The restarted
survival then falls as ``e^{-alpha R}`` across windows, one number per
window instead of one propagation per measurement.  Routines here
extract ``alpha``, scan restart periods for the one minimizing the mean
detection time (equivalently maximizing ``alpha / t_r``), and quantify
how far each dissipative engine drifts from the projective reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import measured_evolution
from .errors import InstantAbsorptionError, NeverDetectedError, QresetError
from .lattice import LatticeSpec, ModelKind, build_hamiltonian, initial_state, propagator
from .restart import mfdt

__all__ = [
    "AlphaResult",
    "ComparisonReport",
    "OptimalTr",
    "FitResult",
    "alpha",
    "survival_prediction",
    "optimal_tr_nh",
    "optimal_tr_exact",
    "delta_p_r",
    "fit_exponential",
]


@dataclass(frozen=True)
class AlphaResult:
    """Decay weight of one restart window under a dissipative generator."""

    t_r: float
    alpha: float
    T_s: float
    kind: ModelKind


@dataclass(frozen=True)
class OptimalTr:
    """Objective values over a grid of restart times and the minimizer."""

    grid: np.ndarray
    objective: np.ndarray
    t_star: float


@dataclass(frozen=True)
class ComparisonReport:
    """Per-window gap between projective and dissipative detection curves."""

    tau: float
    r: int
    delta: np.ndarray
    kind: ModelKind | None = None


class FitResult(NamedTuple):
    T_s_fit: float
    residual: float


def alpha(kind: ModelKind, spec: LatticeSpec, tau: float, t_r: float) -> AlphaResult:
    """Window decay weight ``-ln P_eff(t_r)`` from a single propagation.

    ``P_eff`` is the squared norm of the initial state evolved under the
    dissipative generator for the full window time.  A norm above one
    signals a numerically broken propagation; a norm at or below zero
    means the window absorbs everything, where the log diverges and the
    restart protocol degenerates.
    """
    if kind is ModelKind.EXACT:
        raise ValueError("decay weight is defined for the dissipative models only")
    if t_r <= 0:
        raise ValueError(f"restart time must be positive, got {t_r}")
    h = build_hamiltonian(spec, kind, tau=tau)
    op = propagator(h, t_r, hermitian=False, kind=kind, tau=tau)
    phi = op.matrix @ initial_state(spec)
    p_eff = float(np.vdot(phi, phi).real)
    if p_eff > 1.0 + 1e-10:
        raise QresetError(
            f"dissipative propagation produced norm {p_eff} > 1 at t_r={t_r}"
        )
    if p_eff <= 0.0:
        raise InstantAbsorptionError(
            f"window survival vanished at t_r={t_r}; decay weight diverges"
        )
    a = -math.log(p_eff)
    t_s = math.inf if a == 0.0 else t_r / a
    return AlphaResult(t_r=t_r, alpha=a, T_s=t_s, kind=kind)


def survival_prediction(alpha_value: float, t_r: float, times: np.ndarray) -> np.ndarray:
    """Predicted restarted survival ``e^{-alpha T / t_r}`` at the given times."""
    if t_r <= 0:
        raise ValueError(f"restart time must be positive, got {t_r}")
    times = np.asarray(times, dtype=np.float64)
    return np.exp(-alpha_value * times / t_r)


def optimal_tr_nh(
    kind: ModelKind, spec: LatticeSpec, tau: float, grid: Sequence[float]
) -> OptimalTr:
    """Restart time minimizing ``-alpha / t_r`` over a grid.

    Minimizing ``-alpha / t_r`` maximizes the decay per unit time, the
    dissipative stand-in for minimizing the mean detection time.  Grid
    points where the window absorbs everything are skipped (their mean
    detection time is not improved by information the model no longer
    carries).  Ties resolve toward the smallest restart time.
    """
    grid_arr = np.asarray(list(grid), dtype=np.float64)
    if grid_arr.size == 0:
        raise ValueError("restart-time grid is empty")
    objective = np.full(grid_arr.size, np.nan)
    for i, t_r in enumerate(grid_arr):
        try:
            res = alpha(kind, spec, tau, float(t_r))
        except InstantAbsorptionError:
            continue
        objective[i] = -res.alpha / res.t_r
    if np.all(np.isnan(objective)):
        raise InstantAbsorptionError(
            "every grid point fully absorbs within one window"
        )
    best = float(np.nanmin(objective))
    t_star = float(grid_arr[np.nonzero(objective == best)[0][0]])
    return OptimalTr(grid=grid_arr, objective=objective, t_star=t_star)


def optimal_tr_exact(
    spec: LatticeSpec,
    tau: float,
    r_grid: Sequence[int],
    bulk_guard: bool = True,
) -> OptimalTr:
    """Restart period minimizing the projective mean detection time.

    Runs the projective dynamics once out to the largest period in the
    grid and evaluates the closed-form mean for each candidate.  Periods
    with no detection probability at all get an infinite mean.
    """
    r_values = [int(r) for r in r_grid]
    if not r_values:
        raise ValueError("restart-period grid is empty")
    if any(r < 1 for r in r_values):
        raise ValueError("restart periods must be at least 1")
    base = measured_evolution(spec, tau, max(r_values), bulk_guard=bulk_guard)
    grid_arr = np.asarray([r * tau for r in r_values], dtype=np.float64)
    objective = np.empty(grid_arr.size)
    for i, r in enumerate(r_values):
        try:
            objective[i] = mfdt(base, r, tau)
        except NeverDetectedError:
            objective[i] = np.inf
    if np.all(np.isinf(objective)):
        raise NeverDetectedError("no restart period in the grid ever detects")
    best = float(np.min(objective))
    t_star = float(grid_arr[np.nonzero(objective == best)[0][0]])
    return OptimalTr(grid=grid_arr, objective=objective, t_star=t_star)


def delta_p_r(
    exact_pdet_reset: np.ndarray,
    eff_pdet_reset: np.ndarray,
    r: int,
    tau: float,
    R_max: int,
) -> ComparisonReport:
    """Mean absolute detection-probability gap, window by window.

    Both inputs are integrated detection probabilities under the same
    restart protocol, sampled at every measurement.  Window ``R`` covers
    measurements ``rR + 1 .. r(R+1)``; its score is the mean of the
    absolute pointwise differences inside it.
    """
    if r < 1:
        raise ValueError(f"restart period must be at least 1, got {r}")
    if R_max < 1:
        raise ValueError(f"window count must be at least 1, got {R_max}")
    exact_arr = np.asarray(exact_pdet_reset, dtype=np.float64)
    eff_arr = np.asarray(eff_pdet_reset, dtype=np.float64)
    if exact_arr.shape != eff_arr.shape:
        raise ValueError(
            f"curves disagree in shape: {exact_arr.shape} vs {eff_arr.shape}"
        )
    needed = r * R_max
    if exact_arr.size < needed:
        raise ValueError(
            f"need {needed} samples for {R_max} windows of {r}, got {exact_arr.size}"
        )
    gaps = np.abs(exact_arr[:needed] - eff_arr[:needed])
    delta = gaps.reshape(R_max, r).mean(axis=1)
    return ComparisonReport(tau=tau, r=r, delta=delta)


def fit_exponential(
    trajectory: np.ndarray, times: np.ndarray, window: tuple[float, float]
) -> FitResult:
    """Least-squares exponential timescale of a survival trajectory.

    Fits ``ln P = a - T / T_s`` over the samples whose times fall in the
    closed window.  Needs at least five samples there, all positive; the
    residual is the RMS misfit of the log curve.
    """
    trajectory = np.asarray(trajectory, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if trajectory.shape != times.shape:
        raise ValueError(
            f"trajectory and times disagree in shape: {trajectory.shape} vs {times.shape}"
        )
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"fit window is empty: [{lo}, {hi}]")
    mask = (times >= lo) & (times <= hi)
    if int(mask.sum()) < 5:
        raise ValueError(
            f"fit window [{lo}, {hi}] holds {int(mask.sum())} samples, need at least 5"
        )
    t_w = times[mask]
    p_w = trajectory[mask]
    if np.any(p_w <= 0):
        raise ValueError("survival must stay positive inside the fit window")
    log_p = np.log(p_w)
    slope, intercept = np.polyfit(t_w, log_p, 1)
    if slope >= 0:
        raise ValueError(f"survival does not decay over the window (slope {slope})")
    resid = float(np.sqrt(np.mean((intercept + slope * t_w - log_p) ** 2)))
    return FitResult(T_s_fit=-1.0 / slope, residual=resid)

"""Random-telegraph barrier noise and Monte Carlo decoherence statistics.

A barrier height switches between two levels at renewal times with
exponentially distributed dwell times.  An ensemble of evolutions driven
by independent trajectories is reduced to per-time means with Student-t
confidence bands.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .potential import StepFunction


@dataclass(frozen=True)
class TelegraphModel:
    """Two-level telegraph process for a barrier height.

    Dwell times on both levels are i.i.d. exponential with mean
    ``mean_dwell``; the trajectory starts on ``v_min`` unless
    ``start_high`` is set.  Trajectories are reproducible for a fixed seed.
    """

    v_min: float
    v_max: float
    mean_dwell: float
    seed: int = 0
    start_high: bool = False

    def __post_init__(self) -> None:
        if self.v_max < self.v_min:
            raise ValueError("need v_max >= v_min")
        if self.mean_dwell <= 0:
            raise ValueError("mean_dwell must be positive")

    def with_seed(self, seed: int) -> "TelegraphModel":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class EnsembleTrace:
    """Per-time ensemble mean and confidence band of dot probabilities."""

    times: np.ndarray
    mean_probs: np.ndarray  # (n_times, n_dots)
    ci_half_width: np.ndarray  # (n_times, n_dots)
    n_runs: int
    per_run_seeds: tuple[int, ...]


def telegraph_trajectory(model: TelegraphModel, horizon: float) -> StepFunction:
    """Sample one telegraph trajectory covering [0, horizon]."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(model.seed)
    switch_times = []
    t = 0.0
    while True:
        t += rng.exponential(model.mean_dwell)
        if t >= horizon:
            break
        switch_times.append(t)
    levels = [model.v_max, model.v_min] if model.start_high else [model.v_min, model.v_max]
    values = [levels[i % 2] for i in range(len(switch_times) + 1)]
    return StepFunction(np.asarray(switch_times), np.asarray(values))


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Deterministic per-run seed from the master seed and run index."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def student_ci(samples, confidence: float = 0.95, axis: int = 0):
    """Sample mean and Student-t half-width at the given confidence level.

    Works on arrays: statistics are taken along ``axis``.  Requires at
    least two samples.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    if n < 2:
        raise ValueError("need at least 2 samples for a confidence interval")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    mean = samples.mean(axis=axis)
    sd = samples.std(axis=axis, ddof=1)
    tq = stats.t.ppf(0.5 * (1.0 + confidence), df=n - 1)
    half = tq * sd / np.sqrt(n)
    return mean, half


def ensemble_statistics(times, probs, per_run_seeds,
                        confidence: float = 0.95) -> EnsembleTrace:
    """Reduce per-run probability traces (n_runs, n_times, n_dots)."""
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 3 or probs.shape[0] < 2:
        raise ValueError("probs must be (n_runs >= 2, n_times, n_dots)")
    mean, half = student_ci(probs, confidence=confidence, axis=0)
    return EnsembleTrace(np.asarray(times, dtype=float), mean, half,
                         probs.shape[0], tuple(int(s) for s in per_run_seeds))


def ensemble_run(run_fn, model: TelegraphModel, n_runs: int, horizon: float,
                 master_seed: int = 0, confidence: float = 0.95) -> EnsembleTrace:
    """Monte Carlo ensemble over telegraph trajectories.

    ``run_fn(trajectory) -> (times, dot_probs)`` evolves one realization;
    per-run seeds are derived deterministically from ``master_seed`` and the
    reduction is ordered by run index, so the result does not depend on how
    the runs were executed.
    """
    if n_runs < 2:
        raise ValueError("need n_runs >= 2 for a confidence interval")
    seeds = [derive_run_seed(master_seed, i) for i in range(n_runs)]
    times = None
    probs = []
    for seed in seeds:
        t, p = run_fn(telegraph_trajectory(model.with_seed(seed), horizon))
        if times is None:
            times = np.asarray(t, dtype=float)
        probs.append(np.asarray(p, dtype=float))
    return ensemble_statistics(times, np.stack(probs), seeds, confidence)

"""Monte Carlo calibration of the rank-test procedure.

Synthetic N x k matrices are drawn as effect[j] + Gaussian noise.  An
all-zero effect vector realizes the null hypothesis, so the rejection rate
estimates the Type-I error; nonzero effects estimate power.  Every trial
draws from its own generator stream keyed by (seed, trial index), so results
are bitwise identical for any degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat

import numpy as np

from .distributions import chi_square_sf
from .errors import ValidationError
from .procedure import friedman_statistic, nemenyi_cd, pairwise_significance
from .ranks import Direction, ModelId, PerformanceMatrix, average_ranks

# 97.5% normal quantile, for the 95% Wilson interval.
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    """Parameters for one simulation study."""

    n_datasets: int
    n_models: int
    effect: tuple
    noise_sd: float
    trials: int
    seed: int
    alpha: float = 0.05

    def __post_init__(self):
        for name, lo in (("n_datasets", 2), ("n_models", 3), ("trials", 1)):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < lo:
                raise ValidationError(f"{name} must be an integer >= {lo}, got {v!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (
            0 <= self.seed < 2**64
        ):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        effect = tuple(float(e) for e in self.effect)
        if len(effect) != self.n_models:
            raise ValidationError(
                f"effect vector has {len(effect)} entries for {self.n_models} models"
            )
        if not all(math.isfinite(e) for e in effect):
            raise ValidationError("effect entries must be finite")
        object.__setattr__(self, "effect", effect)
        if isinstance(self.noise_sd, bool) or not (
            isinstance(self.noise_sd, (int, float))
            and math.isfinite(self.noise_sd)
            and self.noise_sd > 0
        ):
            raise ValidationError(f"noise_sd must be a positive real, got {self.noise_sd!r}")
        object.__setattr__(self, "noise_sd", float(self.noise_sd))
        if not (isinstance(self.alpha, float) and 0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must lie strictly in (0, 1), got {self.alpha!r}")

    @property
    def is_null(self) -> bool:
        return all(e == 0.0 for e in self.effect)

    def to_dict(self) -> dict:
        return {
            "n_datasets": self.n_datasets,
            "n_models": self.n_models,
            "effect": list(self.effect),
            "noise_sd": self.noise_sd,
            "trials": self.trials,
            "seed": self.seed,
            "alpha": self.alpha,
        }


def generate_matrix(cfg: SimConfig, trial_index: int) -> PerformanceMatrix:
    """Draw the synthetic matrix for one trial.

    The generator is a counter-based stream keyed by (seed, trial index),
    so the matrix for a given (cfg, trial_index) never depends on which
    other trials ran, in what order, or in which process.
    """
    if not isinstance(trial_index, int) or not (0 <= trial_index < cfg.trials):
        raise ValidationError(
            f"trial_index must lie in [0, {cfg.trials}), got {trial_index!r}"
        )
    key = np.array([cfg.seed, trial_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    noise = rng.standard_normal((cfg.n_datasets, cfg.n_models))
    values = np.asarray(cfg.effect) + cfg.noise_sd * noise
    return PerformanceMatrix(
        datasets=tuple(f"dataset_{i + 1:03d}" for i in range(cfg.n_datasets)),
        models=tuple(ModelId(f"model_{j + 1:02d}") for j in range(cfg.n_models)),
        values=values,
        direction=Direction.MAXIMIZE,
    )


def _run_chunk(cfg: SimConfig, start: int, stop: int) -> tuple:
    """Run trials [start, stop): count omnibus rejections and pairwise hits.

    Pairwise hits are only tallied for non-null configs; a Type-I study
    reports the omnibus rate alone, which keeps its alpha free of the
    critical-value table's tabulated levels.
    """
    k = cfg.n_models
    cd = None if cfg.is_null else nemenyi_cd(k, cfg.n_datasets, cfg.alpha)
    rejections = 0
    pair_hits = np.zeros((k, k), dtype=np.int64)
    for t in range(start, stop):
        avg = average_ranks(generate_matrix(cfg, t))
        stat = friedman_statistic(avg, cfg.n_datasets, k)
        if chi_square_sf(stat, k - 1) < cfg.alpha:
            rejections += 1
        if cd is not None:
            pair_hits += pairwise_significance(avg, cd)
    return rejections, pair_hits


def _run_trials(cfg: SimConfig, workers: int) -> tuple:
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ValidationError(f"workers must be a positive integer, got {workers!r}")
    if workers == 1:
        return _run_chunk(cfg, 0, cfg.trials)
    bounds = [i * cfg.trials // workers for i in range(workers + 1)]
    spans = [(a, b) for a, b in zip(bounds, bounds[1:]) if a < b]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(_run_chunk, repeat(cfg), (a for a, _ in spans), (b for _, b in spans))
        )
    rejections = sum(r for r, _ in results)
    pair_hits = np.zeros((cfg.n_models, cfg.n_models), dtype=np.int64)
    for _, hits in results:
        pair_hits += hits
    return rejections, pair_hits


def _wilson_ci(successes: int, trials: int) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    p = successes / trials
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return center - half, center + half


@dataclass(frozen=True)
class Type1Estimate:
    """Null rejection rate with its 95% binomial confidence interval."""

    config: SimConfig
    rejections: int
    rejection_rate: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "rejection_rate": self.rejection_rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "trials": self.config.trials,
        }


@dataclass(frozen=True)
class PowerEstimate:
    """Omnibus rejection rate and per-pair detection rates under an effect."""

    config: SimConfig
    cd: float
    omnibus_rejections: int
    omnibus_rate: float
    ci_low: float
    ci_high: float
    pairwise_detection: np.ndarray

    def __post_init__(self):
        rates = np.array(self.pairwise_detection, dtype=float)
        rates.setflags(write=False)
        object.__setattr__(self, "pairwise_detection", rates)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "omnibus_rate": self.omnibus_rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "trials": self.config.trials,
            "cd": self.cd,
            "pairwise_detection": self.pairwise_detection.tolist(),
        }


def estimate_type1(cfg: SimConfig, workers: int = 1) -> Type1Estimate:
    """Estimate the Type-I error rate of the omnibus test under the null."""
    if not cfg.is_null:
        raise ValidationError("estimate_type1 requires an all-zero effect vector")
    rejections, _ = _run_trials(cfg, workers)
    lo, hi = _wilson_ci(rejections, cfg.trials)
    return Type1Estimate(
        config=cfg,
        rejections=rejections,
        rejection_rate=rejections / cfg.trials,
        ci_low=lo,
        ci_high=hi,
    )


def estimate_power(cfg: SimConfig, workers: int = 1) -> PowerEstimate:
    """Estimate omnibus power and per-pair detection rates under an effect."""
    if cfg.is_null:
        raise ValidationError("estimate_power requires a nonzero effect vector")
    rejections, pair_hits = _run_trials(cfg, workers)
    lo, hi = _wilson_ci(rejections, cfg.trials)
    return PowerEstimate(
        config=cfg,
        cd=nemenyi_cd(cfg.n_models, cfg.n_datasets, cfg.alpha),
        omnibus_rejections=rejections,
        omnibus_rate=rejections / cfg.trials,
        ci_low=lo,
        ci_high=hi,
        pairwise_detection=pair_hits / cfg.trials,
    )

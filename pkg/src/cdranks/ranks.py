"""Performance matrices and their conversion to per-dataset ranks.

A :class:`PerformanceMatrix` holds one metric value per (dataset, model)
cell.  Ranking happens within each dataset row (rank 1 = best, ties get
mid-ranks), and :func:`average_ranks` averages those rows into the per-model
average ranks that the omnibus test consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import UnsupportedDesignError, ValidationError


class Direction(str, Enum):
    """Whether larger or smaller metric values are better."""

    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"

    @classmethod
    def parse(cls, value: "str | Direction") -> "Direction":
        if isinstance(value, Direction):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(
                f"direction must be 'maximize' or 'minimize', got {value!r}"
            ) from None


@dataclass(frozen=True)
class ModelId:
    """A compared model: a display label plus free-form metadata tags.

    Tags encode the dimensions varied across models, e.g.
    ``{"feature_set": "clickstream", "algorithm": "adaboost"}``, so that
    results can later be summarized per tag value.
    """

    label: str
    tags: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ValidationError("model label must be a non-empty string")
        object.__setattr__(self, "tags", dict(self.tags))


@dataclass(frozen=True)
class PerformanceMatrix:
    """An N x k block of metric values: one row per dataset, one column per model.

    Invariants enforced at construction: at least one dataset row, at least
    three model columns, every cell finite, unique dataset ids and model
    labels.  The values array is made read-only; instances are safe to share
    across threads.
    """

    datasets: tuple
    models: tuple
    values: np.ndarray
    direction: Direction = Direction.MAXIMIZE

    def __post_init__(self):
        datasets = tuple(self.datasets)
        models = tuple(self.models)
        values = np.array(self.values, dtype=float)
        direction = Direction.parse(self.direction)

        if values.ndim != 2:
            raise ValidationError(f"values must be 2-dimensional, got shape {values.shape}")
        n, k = values.shape
        if len(datasets) != n:
            raise ValidationError(f"{len(datasets)} dataset ids for {n} rows")
        if len(models) != k:
            raise ValidationError(f"{len(models)} models for {k} columns")
        if n < 1:
            raise ValidationError("at least one dataset row is required")
        if k < 3:
            raise UnsupportedDesignError(
                f"k={k} models unsupported: the rank test machinery needs k >= 3"
            )
        if len(set(datasets)) != n:
            dupes = sorted({d for d in datasets if datasets.count(d) > 1})
            raise ValidationError(f"duplicate dataset id(s): {', '.join(dupes)}")
        labels = [m.label for m in models]
        if len(set(labels)) != k:
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValidationError(f"duplicate model label(s): {', '.join(dupes)}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = bad[0]
            raise ValidationError(
                f"non-finite value at dataset {datasets[i]!r}, model {labels[j]!r}"
            )

        values.setflags(write=False)
        object.__setattr__(self, "datasets", datasets)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "direction", direction)

    @property
    def n_datasets(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def labels(self) -> tuple:
        return tuple(m.label for m in self.models)


def _row_sum_ok(total: float, k: int) -> bool:
    return math.isclose(total, k * (k + 1) / 2, rel_tol=1e-9, abs_tol=1e-9)


@dataclass(frozen=True)
class RankMatrix:
    """Per-dataset mid-ranks, rank 1 = best; each row sums to k(k+1)/2."""

    ranks: np.ndarray

    def __post_init__(self):
        ranks = np.array(self.ranks, dtype=float)
        if ranks.ndim != 2:
            raise ValidationError(f"ranks must be 2-dimensional, got shape {ranks.shape}")
        _, k = ranks.shape
        if np.any(ranks < 1) or np.any(ranks > k):
            raise ValidationError(f"ranks must lie in [1, {k}]")
        for i, total in enumerate(ranks.sum(axis=1)):
            if not _row_sum_ok(total, k):
                raise ValidationError(
                    f"row {i} rank sum {total} != k(k+1)/2 = {k * (k + 1) / 2}"
                )
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def k(self) -> int:
        return self.ranks.shape[1]


@dataclass(frozen=True)
class AverageRanks:
    """Length-k vector of average ranks; entries sum to k(k+1)/2."""

    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.ndim != 1:
            raise ValidationError(f"average ranks must be 1-dimensional, got shape {r.shape}")
        k = r.shape[0]
        if k < 2:
            raise ValidationError("average ranks need at least two models")
        if np.any(~np.isfinite(r)):
            raise ValidationError("average ranks must be finite")
        if np.any(r < 1) or np.any(r > k):
            raise ValidationError(f"average ranks must lie in [1, {k}]")
        if not _row_sum_ok(float(r.sum()), k):
            raise ValidationError(
                f"average ranks sum {r.sum()} != k(k+1)/2 = {k * (k + 1) / 2}"
            )
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def k(self) -> int:
        return self.r.shape[0]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, j: int) -> float:
        return float(self.r[j])


def rank_row(values: Sequence[float], direction: "str | Direction") -> np.ndarray:
    """Rank one dataset row: best value gets rank 1, ties get mid-ranks.

    Under ``maximize`` the largest value is best; under ``minimize`` the
    smallest.  Tied values share the arithmetic mean of the rank positions
    they span, which keeps the row sum at exactly k(k+1)/2.

    Raises
    ------
    ValidationError
        If any value is non-finite (the offending index is named) or if the
        row has fewer than two entries.
    """
    direction = Direction.parse(direction)
    row = np.asarray(values, dtype=float)
    if row.ndim != 1 or row.shape[0] < 2:
        raise ValidationError("rank_row needs a 1-d vector of at least two values")
    bad = np.flatnonzero(~np.isfinite(row))
    if bad.size:
        raise ValidationError(f"non-finite value at index {bad[0]}")
    signed = -row if direction is Direction.MAXIMIZE else row
    return rankdata(signed, method="average")


def rank_matrix(m: PerformanceMatrix) -> RankMatrix:
    """Rank every dataset row of a performance matrix."""
    values = m.values
    bad_rows = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if bad_rows.size:
        # Unreachable through the validated constructor; kept so raw callers
        # still get the dataset id in the message.
        i = bad_rows[0]
        j = np.flatnonzero(~np.isfinite(values[i]))[0]
        raise ValidationError(f"dataset {m.datasets[i]!r}: non-finite value at index {j}")
    signed = -values if m.direction is Direction.MAXIMIZE else values
    return RankMatrix(rankdata(signed, method="average", axis=1))


def average_ranks(m: PerformanceMatrix) -> AverageRanks:
    """Average the per-dataset ranks into one rank per model (lower = better)."""
    rm = rank_matrix(m)
    return AverageRanks(rm.ranks.mean(axis=0))

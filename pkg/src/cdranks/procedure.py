"""The two-stage comparison procedure.

Stage one is the Friedman omnibus test (chi-square form, or the
less-conservative F-form correction) on the average ranks of k models over N
datasets.  Stage two is the post-hoc Nemenyi test: a critical difference in
average rank decides every pairwise comparison, and models whose ranks fall
within the CD of each other are grouped as statistically indistinguishable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import chi_square_sf, f_sf, q_alpha
from .errors import (
    DegenerateStatisticError,
    SmallSampleWarning,
    UnsupportedDesignError,
    ValidationError,
)
from .ranks import AverageRanks, PerformanceMatrix, average_ranks

# Below this many datasets the chi-square approximation is rough and exact
# small-sample critical values would be preferable.
SMALL_SAMPLE_N = 15


class Variant(str, Enum):
    """Omnibus statistic form: the classic chi-square or the F-form correction."""

    FRIEDMAN = "friedman"
    IMAN_DAVENPORT = "iman_davenport"

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, Variant):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(
                f"variant must be 'friedman' or 'iman_davenport', got {value!r}"
            ) from None


@dataclass(frozen=True)
class FriedmanResult:
    """Outcome of the omnibus test.

    ``df`` is the numerator degrees of freedom (k - 1); ``df2`` is the
    denominator degrees of freedom and is only set for the F-form variant.
    """

    statistic: float
    df: int
    p_value: float
    alpha: float
    reject_null: bool
    variant: Variant
    df2: int | None = None


@dataclass(frozen=True)
class NemenyiResult:
    """Outcome of the post-hoc test.

    ``significant[a][b]`` is True iff models a and b differ by at least the
    critical difference in average rank.  ``groups`` are the maximal runs of
    rank-adjacent models whose total spread stays below the CD; every model
    index appears in at least one group.
    """

    cd: float
    alpha: float
    significant: np.ndarray
    groups: tuple

    def __post_init__(self):
        sig = np.array(self.significant, dtype=bool)
        sig.setflags(write=False)
        object.__setattr__(self, "significant", sig)
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))


def _check_alpha(alpha: float) -> float:
    if not (isinstance(alpha, float) and 0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _rank_vector(ranks) -> np.ndarray:
    """Coerce AverageRanks or any finite rank sequence to a 1-d array.

    The post-hoc geometry (pairwise gaps, grouping, layout) is meaningful
    for any vector in rank units, not only exact column means, so these
    functions do not require the AverageRanks sum invariant.
    """
    r = ranks.r if isinstance(ranks, AverageRanks) else np.asarray(ranks, dtype=float)
    if r.ndim != 1 or r.shape[0] < 2:
        raise ValidationError("need a 1-d vector of at least two ranks")
    if np.any(~np.isfinite(r)):
        raise ValidationError("ranks must be finite")
    return r


def friedman_statistic(ranks: AverageRanks, n_datasets: int, k: int) -> float:
    """The rank-based omnibus statistic 12N/(k(k+1)) * [sum_j R_j^2 - k(k+1)^2/4].

    Computed in the centered form 12N/(k(k+1)) * sum_j (R_j - (k+1)/2)^2,
    which is the same expression but cannot go negative through rounding.
    Zero exactly when all average ranks are equal.
    """
    if k < 3:
        raise UnsupportedDesignError(f"k={k} models unsupported: need k >= 3")
    if len(ranks) != k:
        raise ValidationError(f"{len(ranks)} average ranks for k={k} models")
    if n_datasets < 2:
        raise UnsupportedDesignError(f"N={n_datasets} datasets unsupported: need N >= 2")
    centered = ranks.r - (k + 1) / 2.0
    bracket = float(np.dot(centered, centered))
    return (12.0 * n_datasets * bracket) / (k * (k + 1.0))


def friedman_test(
    m: PerformanceMatrix,
    alpha: float = 0.05,
    variant: "str | Variant" = Variant.FRIEDMAN,
) -> FriedmanResult:
    """Run the omnibus test on a performance matrix.

    The ``friedman`` variant compares the statistic to chi-square with k - 1
    degrees of freedom.  The ``iman_davenport`` variant rescales it to
    F_F = (N-1) * chi2 / (N(k-1) - chi2) with (k-1, (k-1)(N-1)) degrees of
    freedom, which is less conservative.

    Raises
    ------
    DegenerateStatisticError
        Under ``iman_davenport`` when rankings are perfectly consistent
        (chi2 = N(k-1)), where the F statistic is undefined.
    """
    _check_alpha(alpha)
    variant = Variant.parse(variant)
    n, k = m.n_datasets, m.k
    if n < SMALL_SAMPLE_N:
        warnings.warn(
            f"only N={n} datasets: the chi-square approximation to the rank "
            f"statistic is rough below N={SMALL_SAMPLE_N}",
            SmallSampleWarning,
            stacklevel=2,
        )
    chi2 = friedman_statistic(average_ranks(m), n, k)

    if variant is Variant.FRIEDMAN:
        statistic, df, df2 = chi2, k - 1, None
        p = chi_square_sf(chi2, df)
    else:
        denom = n * (k - 1) - chi2
        if denom <= 1e-9:
            raise DegenerateStatisticError(
                "rankings are perfectly consistent across datasets: the F-form "
                "statistic divides by N(k-1) - chi2 = 0"
            )
        statistic = (n - 1) * chi2 / denom
        df, df2 = k - 1, (k - 1) * (n - 1)
        p = f_sf(statistic, df, df2)

    return FriedmanResult(
        statistic=statistic,
        df=df,
        p_value=p,
        alpha=alpha,
        reject_null=p < alpha,
        variant=variant,
        df2=df2,
    )


def nemenyi_cd(k: int, n_datasets: int, alpha: float = 0.05) -> float:
    """Critical difference q_alpha * sqrt(k(k+1) / (6N)) in average-rank units."""
    if n_datasets < 2:
        raise UnsupportedDesignError(f"N={n_datasets} datasets unsupported: need N >= 2")
    return q_alpha(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * n_datasets))


def pairwise_significance(ranks, cd: float) -> np.ndarray:
    """Boolean k x k matrix: True where |R_a - R_b| >= cd.

    A gap exactly equal to the CD counts as significant, making this the
    exact complement of membership in a common indistinguishable group.
    ``ranks`` may be AverageRanks or any finite rank vector.
    """
    if not (math.isfinite(cd) and cd > 0):
        raise ValidationError(f"cd must be a positive real, got {cd!r}")
    r = _rank_vector(ranks)
    sig = np.abs(r[:, None] - r[None, :]) >= cd
    np.fill_diagonal(sig, False)
    sig.setflags(write=False)
    return sig


def indistinguishable_groups(ranks, cd: float) -> list:
    """Maximal runs of rank-adjacent models whose rank spread is below the CD.

    Models are sorted by average rank (ties broken by index for determinism);
    every maximal contiguous run with spread < cd becomes one group, so a
    model far from all others comes back as a singleton.  No returned group
    is a subset of another and together they cover all k models.  ``ranks``
    may be AverageRanks or any finite rank vector.

    Returns a list of tuples of model indices, each tuple in rank order.
    """
    if not (math.isfinite(cd) and cd > 0):
        raise ValidationError(f"cd must be a positive real, got {cd!r}")
    r = _rank_vector(ranks)
    k = r.shape[0]
    order = sorted(range(k), key=lambda j: (r[j], j))
    sorted_r = [float(r[j]) for j in order]

    # The run end index is nondecreasing in the start index, so a run is
    # maximal exactly when it reaches further than the previous kept run.
    groups = []
    last_end = -1
    for start in range(k):
        end = start
        while end + 1 < k and sorted_r[end + 1] - sorted_r[start] < cd:
            end += 1
        if end > last_end:
            groups.append(tuple(order[start : end + 1]))
            last_end = end
    return groups


def nemenyi_test(ranks, n_datasets: int, alpha: float = 0.05) -> NemenyiResult:
    """Run the post-hoc test: critical difference, pairwise calls, and groups."""
    _check_alpha(alpha)
    cd = nemenyi_cd(len(_rank_vector(ranks)), n_datasets, alpha)
    return NemenyiResult(
        cd=cd,
        alpha=alpha,
        significant=pairwise_significance(ranks, cd),
        groups=indistinguishable_groups(ranks, cd),
    )


def build_report(
    m: PerformanceMatrix,
    friedman: FriedmanResult,
    nemenyi: NemenyiResult,
    ranks: AverageRanks | None = None,
) -> dict:
    """Assemble the JSON-serializable analysis report.

    Models are listed best rank first (label breaks ties).  The post-hoc
    section is always present; ``posthoc_licensed`` records whether the
    omnibus test actually rejected, since an accepted null leaves the
    pairwise conclusions unsupported.
    """
    if ranks is None:
        ranks = average_ranks(m)
    k = m.k
    order = sorted(range(k), key=lambda j: (ranks.r[j], m.models[j].label))

    pairs = []
    for a_pos in range(k):
        for b_pos in range(a_pos + 1, k):
            a, b = order[a_pos], order[b_pos]
            if nemenyi.significant[a][b]:
                pairs.append([m.models[a].label, m.models[b].label])

    groups = [[m.models[j].label for j in group] for group in nemenyi.groups]

    report = {
        "statistic": friedman.statistic,
        "df": friedman.df,
        "p_value": friedman.p_value,
        "alpha": friedman.alpha,
        "reject_null": friedman.reject_null,
        "variant": friedman.variant.value,
        "cd": nemenyi.cd,
        "average_ranks": [
            {
                "label": m.models[j].label,
                "tags": dict(m.models[j].tags),
                "rank": float(ranks.r[j]),
            }
            for j in order
        ],
        "significant_pairs": pairs,
        "groups": groups,
        "posthoc_licensed": friedman.reject_null,
        "n_datasets": m.n_datasets,
    }
    if friedman.df2 is not None:
        report["df2"] = friedman.df2
    return report

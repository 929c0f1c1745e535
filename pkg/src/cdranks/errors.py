"""Exception hierarchy for the package.

Each class carries the CLI exit code it maps onto, so shell callers can tell
bad input (2) from an unsupported statistical design (3) or a numerical
failure (4).
"""

from __future__ import annotations


class CdranksError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(CdranksError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class IncompleteDesignError(ValidationError):
    """One or more (dataset, model) pairs have no measurement."""

    def __init__(self, missing_pairs):
        self.missing_pairs = tuple(tuple(p) for p in sorted(missing_pairs))
        listing = ", ".join(f"({d}, {m})" for d, m in self.missing_pairs)
        super().__init__(
            f"incomplete design: {len(self.missing_pairs)} missing "
            f"(dataset, model) pair(s): {listing}"
        )


class UnsupportedDesignError(CdranksError):
    """The statistical machinery does not cover this design (k, N, alpha, ...)."""

    exit_code = 3


class DegenerateStatisticError(UnsupportedDesignError):
    """A test statistic is undefined for this data.

    The F-form correction divides by N*(k-1) - chi2, which is zero exactly
    when the rankings are perfectly consistent across all datasets.
    """


class NumericalError(CdranksError):
    """A numerical routine failed to reach its accuracy target."""

    exit_code = 4


class SmallSampleWarning(UserWarning):
    """The chi-square approximation is rough for small dataset counts."""


class DroppedDatasetsWarning(UserWarning):
    """Datasets were dropped because they were missing measurements."""

"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` (the class name) so the CLI and the
HTTP service can emit machine-readable errors without string matching.
"""

from __future__ import annotations


class ConfsurvError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidInput(ConfsurvError):
    """Input data or parameters violate a documented precondition."""


class FitDiverged(ConfsurvError):
    """Iterative model fitting failed to converge (or the likelihood is monotone)."""


class SingularDesign(ConfsurvError):
    """Covariate matrix is collinear to working precision."""


class WeightDegenerate(ConfsurvError):
    """An uncensored observation has zero estimated probability of being uncensored.

    Signals that the censoring support is shorter than the failure support at
    that point; callers should switch to the truncated-interval pathway.
    """


class InsufficientSupport(ConfsurvError):
    """Too few qualifying observations to condition on (remaining-lifetime path)."""


class InvalidSplit(ConfsurvError):
    """A train/test fold lacks the events needed for validation."""


class CalibrationFailed(ConfsurvError):
    """Root finding for a target censoring rate did not succeed."""


class IngestError(ConfsurvError):
    """CSV ingestion failed; ``row`` is the 1-based data row, 0 for header issues."""

    def __init__(self, message: str, row: int = 0):
        super().__init__(message)
        self.row = row

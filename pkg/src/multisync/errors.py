"""Exception types shared across the package."""


class MultisyncError(Exception):
    """Base class for all package errors."""


class ValidationError(MultisyncError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, bad graph weights."""


class HypothesisError(MultisyncError):
    """A criterion's hypotheses do not hold for the given system.

    ``reason`` is a short machine-friendly tag, e.g. ``"column_sums"``.
    """

    def __init__(self, message, reason="hypothesis"):
        super().__init__(message)
        self.reason = reason


class NotCommutingError(HypothesisError):
    def __init__(self, message, pair=None, residual=None):
        super().__init__(message, reason="not_commuting")
        self.pair = pair
        self.residual = residual


class NotPositiveDefiniteError(ValidationError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SolverError(MultisyncError):
    """The SDP solver hit its iteration cap or lost numerical feasibility."""


class DivergenceError(MultisyncError):
    """A simulation produced non-finite or runaway states."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step

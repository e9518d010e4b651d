"""Exception hierarchy shared across the package."""


class PrivfitError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(PrivfitError):
    """Malformed or inconsistent inputs (bad kernels, tables, flags)."""


class DomainError(ValidationError):
    """Arguments outside the mathematical domain of an operation."""


class SizeError(ValidationError):
    """Exact computation refused because the instance is too large."""


class DegenerateDataError(ValidationError):
    """Data carries no information (e.g. a post-processed table summing to 0)."""


class NumericalError(PrivfitError):
    """Internal numerical inconsistency (e.g. an LR statistic below -1e-9)."""


class OptimizerError(NumericalError):
    """MLE search failed to converge.

    Carries the last iterate and gradient norm for diagnostics.
    """

    def __init__(self, message, last_iterate=None, grad_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm


class InfeasibleError(PrivfitError):
    """Tilting target on or outside the convex hull of the support."""

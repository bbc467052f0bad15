"""Exception and warning types shared across the package."""


class IneqForgeError(Exception):
    """Base class for all package errors."""


class ParameterError(IneqForgeError, ValueError):
    """Invalid argument values (grid bounds, sizes, option names)."""


class DomainError(IneqForgeError, ValueError):
    """A dimension or exponent tuple lies outside the admissible range.

    The ``constraint`` attribute names the violated condition.
    """

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class UnsupportedOrderError(IneqForgeError, ValueError):
    """Requested derivative or Bessel order exceeds the configured ceiling."""


class NumericError(IneqForgeError, ArithmeticError):
    """Non-finite samples were encountered."""


class AccuracyError(IneqForgeError):
    """A truncation or noise estimate exceeded its tolerance."""

    def __init__(self, message, flags=()):
        super().__init__(message)
        self.flags = tuple(flags)


class ResolutionError(IneqForgeError):
    """The grid cannot resolve the requested oscillation."""


class SolverError(IneqForgeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class AccuracyWarning(UserWarning):
    """Soft accuracy concern (noise amplification, boundary maximizer)."""

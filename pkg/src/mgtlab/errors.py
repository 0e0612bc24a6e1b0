"""Exception hierarchy shared by every mgtlab module."""


class MgtError(Exception):
    """Base class for all library errors."""


class DomainError(MgtError, ValueError):
    """An input lies outside the hypotheses of the operation."""


class UsageError(MgtError, ValueError):
    """An operation was called with an inconsistent combination of options."""


class DegenerateConfigurationError(MgtError, ArithmeticError):
    """The closed-form kernel representation breaks down (coalescing roots)."""

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class ResolutionError(MgtError, ValueError):
    """A grid is too coarse for the requested quadrature."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class FitError(MgtError, ValueError):
    """A rate fit cannot be carried out on the supplied samples."""


class IntegrationFailure(MgtError, RuntimeError):
    """The ODE oracle gave up (step-size underflow or similar)."""


class ConfigError(MgtError, ValueError):
    """Invalid command-line or file configuration."""

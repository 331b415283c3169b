"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`HbsError`; the CLI maps each subclass onto a process exit code.
"""


class HbsError(Exception):
    """Base class for package errors."""

    exit_code = 1


class ConfigurationError(HbsError, ValueError):
    """Invalid sizes, budgets or run configuration."""

    exit_code = 2


class DomainError(HbsError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class NumericalError(HbsError, ArithmeticError):
    """A numerical procedure failed (tolerance not reached, resampling exhausted)."""

    exit_code = 3

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SingularityError(NumericalError):
    """Matrix is rank deficient or too ill-conditioned to invert."""

    def __init__(self, message, matrix=None, condition=None):
        super().__init__(message)
        self.matrix = matrix
        self.condition = condition


class ReportIOError(HbsError, OSError):
    """Report or fixture file could not be read or written."""

    exit_code = 4

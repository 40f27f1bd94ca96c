"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class TarError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    kind = "error"


class ConfigError(TarError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""

    exit_code = 2
    kind = "config"


class DomainError(ConfigError):
    """Argument outside the domain of the function, e.g. theta outside the window."""

    kind = "domain"


class DegenerateModelError(ConfigError):
    """rho1 == rho2: the threshold is not identifiable."""

    kind = "degenerate-model"


class EmptyInputError(ConfigError):
    kind = "empty-input"


class NumericFailure(TarError, ArithmeticError):
    """Non-finite values, non-convergence or underflow (CLI exit code 3)."""

    exit_code = 3
    kind = "numeric"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

"""Exception hierarchy shared across the package."""


class TeleparityError(Exception):
    """Base class for all package errors."""


class DomainError(TeleparityError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class AssumptionError(TeleparityError):
    """A maintained model assumption (e.g. sigma * s_I < 1) is violated."""


class GuardError(TeleparityError):
    """A configured quantity evaluates outside its admissible range."""


class ConvergenceError(TeleparityError):
    """An iterative procedure failed to converge; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BracketError(ConvergenceError):
    """No sign change found on the root-search interval."""


class InfeasibleRegimeError(TeleparityError):
    """The policy regime cannot be satisfied at any positive output."""


class ConfigError(TeleparityError):
    """A run configuration is invalid or incomplete."""


class DataError(TeleparityError):
    """Input data violate a structural requirement (keys, signs, flags)."""

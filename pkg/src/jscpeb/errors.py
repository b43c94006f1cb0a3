"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class PebError(Exception):
    """Base class for all library errors."""


class DomainError(PebError, ValueError):
    """Inputs outside the validity domain of the model."""


class NearFieldError(DomainError):
    """Target closer to a base station than the near-field guard allows."""


class SingularMatrixError(DomainError):
    """A Fisher block that must be inverted is singular or ill-conditioned."""


class NumericalError(PebError, ArithmeticError):
    """Finite-difference evaluation produced non-finite values."""


class ConfigError(PebError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)

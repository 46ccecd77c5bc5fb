"""Exception hierarchy shared by every module of the package."""


class DlaguerreError(Exception):
    """Base class for all package errors."""


class DomainError(DlaguerreError, ValueError):
    """An argument lies outside the domain an operation supports."""


class PrecisionError(DlaguerreError, ArithmeticError):
    """Precision escalation was exhausted without reaching the target.

    ``estimates`` holds the last two values that failed to agree, when known.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class DataIntegrityError(DlaguerreError):
    """Two independent routes disagree, or input data is inconsistent."""


class ConsistencyError(DlaguerreError):
    """A structural identity failed at certified precision."""

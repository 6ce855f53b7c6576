"""Exception types shared by every module."""


class QmarkError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(QmarkError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(InvalidInput):
    """A numeric argument lies outside the domain of the operation."""


class ResourceLimit(QmarkError, RuntimeError):
    """A requested enumeration or search would exceed its configured cap."""


class Infeasible(InvalidInput):
    """Parameters admit no valid construction.

    ``constraint`` names the violated condition; ``suggestion`` carries a
    hint such as the smallest parameter value estimated to be feasible.
    """

    def __init__(self, message, constraint=None, suggestion=None):
        super().__init__(message)
        self.constraint = constraint
        self.suggestion = suggestion


class LemmaViolation(QmarkError, AssertionError):
    """An inequality that must hold exactly was found to be false."""

"""Exception hierarchy shared across the package."""


class ProbingError(Exception):
    """Base class for all package errors."""


class LimitError(ProbingError):
    """An exact routine was asked to enumerate beyond its size cap."""


class StateBudgetError(LimitError):
    """The adaptive DP visited more states than allowed."""


class PreconditionError(ProbingError, ValueError):
    """Inputs violate an operation's documented preconditions."""


class StructuralError(ProbingError, ValueError):
    """A strategy tree is malformed for its instance."""


class TheoremViolation(ProbingError, AssertionError):
    """A class-conditional bound failed on a concrete instance."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

"""Exception types raised across the package."""


class DriftFKError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(DriftFKError, ValueError):
    pass


class InvalidDomainError(DriftFKError, ValueError):
    """A domain description violates its invariants."""


class DomainMeasureError(DriftFKError, ValueError):
    pass


class ResolutionError(DriftFKError):
    """Grid too coarse for the requested domain."""


class ShapeMismatchError(DriftFKError, ValueError):
    pass


class PositivityError(DriftFKError):
    """A vector that must be strictly positive is not."""


class NonConvergenceError(DriftFKError):
    """An iteration ran out of budget.

    ``bracket`` and ``history`` carry the last state for diagnostics.
    """

    def __init__(self, message, bracket=None, history=None):
        super().__init__(message)
        self.bracket = bracket
        self.history = list(history) if history is not None else None


class IllConditionedError(DriftFKError):
    """The principal eigenvalue is below the round-off floor of the matrix."""


class BracketError(DriftFKError):
    """Root bracketing failed (no sign change, or integration blow-up)."""


class ProfileValidityError(DriftFKError):
    pass


class PreconditionError(DriftFKError, ValueError):
    pass

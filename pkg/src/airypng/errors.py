"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the documented supported range."""


class NumericsError(RuntimeError):
    """A numerical routine failed to converge to its stated tolerance.

    ``estimates`` holds the last refinement pair so callers can inspect
    how badly the computation disagreed with itself.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class InsufficientDataError(RuntimeError):
    """A Monte Carlo experiment produced too small a conditioned sample."""

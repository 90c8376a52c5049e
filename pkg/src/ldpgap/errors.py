"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class DegenerateBudgetError(DomainError):
    """A budget makes an estimator or mechanism undefined (e.g. the
    randomized-response value estimator at zero value budget)."""


class MissingGroupError(DomainError):
    """A requested group has no tally entry."""


class MissingMeanError(DomainError):
    """A group mean is required but was not supplied."""


class NonMonotonicObjectiveError(RuntimeError):
    """The bound minimized by the budget solver failed its monotonicity
    pre-check; carries the offending grid points."""

    def __init__(self, message, grid=None):
        super().__init__(message)
        self.grid = grid

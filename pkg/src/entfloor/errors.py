"""Exception types shared across the package."""


class InfeasibleError(ValueError):
    """No quantum state is compatible with the requested data."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class ConvergenceError(RuntimeError):
    """A numerical search failed to settle on a trustworthy answer."""

    def __init__(self, message, spread=None, best=None):
        super().__init__(message)
        self.spread = spread
        self.best = best

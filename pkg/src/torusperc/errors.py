"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all torusperc errors."""


class RangeError(SimulationError):
    """A derived quantity (probability, threshold) left its valid range."""


class ResourceCapError(SimulationError):
    """A configured memory/size cap would be exceeded."""


class DegenerateIndexError(SimulationError):
    """An operation needs at least two indexed components (or a nonzero matrix)."""


class ConvergenceError(SimulationError):
    """Iterative eigensolve failed to reach the requested residual.

    Carries the best residual achieved so the caller can decide whether the
    partial answer is usable.
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class DivergenceError(SimulationError):
    """The Neumann series Q + Q^2 + ... does not converge (lambda1(Q) >= 1)."""


class TruncationError(SimulationError):
    """The adaptive horizon cap was hit before the path settled.

    Carries whatever partial excursion data was collected.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FitError(SimulationError):
    """Not enough usable grid points for a requested fit."""

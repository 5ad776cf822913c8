"""Exception hierarchy shared by every module of the package."""


class FdCutoffError(Exception):
    """Base class for all errors raised by fdcutoff."""


class DomainError(FdCutoffError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstraintError(FdCutoffError, ValueError):
    """A parameter combination violates a structural inequality.

    The message always names the violated inequality.
    """


class InfiniteMoment(FdCutoffError, ArithmeticError):
    """A requested moment (or L^m norm) of a heavy-tailed profile diverges."""


class ConvergenceError(FdCutoffError, RuntimeError):
    """An iterative numerical procedure did not reach its tolerance.

    The best available estimate is kept on ``best_estimate``.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class StabilityError(FdCutoffError, RuntimeError):
    """A time step violates the stability bound or the scheme lost mass."""


class ResolutionError(FdCutoffError, ValueError):
    """A grid is too coarse to represent the requested profile."""


class PreconditionError(FdCutoffError, ValueError):
    """An input does not satisfy a documented precondition."""


class InsufficientData(FdCutoffError, ValueError):
    """Too few usable data points for a fit."""


class UnsupportedSize(FdCutoffError, ValueError):
    """A matrix or sample is larger than the supported size."""

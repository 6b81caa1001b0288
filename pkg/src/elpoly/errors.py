"""Exception types shared across the package."""


class ElpolyError(Exception):
    """Base class for package errors."""


class ValidationError(ElpolyError):
    """Bad configuration or arguments (CLI exit code 2)."""


class NonconvergenceError(ElpolyError):
    """An iterative solver failed to reach its tolerance (CLI exit code 3).

    Carries the best residual seen so the failure is diagnosable.
    """

    def __init__(self, message, best_residual=None, context=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.context = context or {}


class QuadratureError(ElpolyError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error

"""Exception types shared across the package."""


class FracstableError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveWeight(FracstableError):
    pass


class NonUnitDirection(FracstableError):
    pass


class UnsupportedDimension(FracstableError):
    pass


class AsymmetricMeasure(FracstableError):
    pass


class UnsupportedParameters(FracstableError):
    pass


class PositiveArgument(FracstableError):
    pass


class NonPositiveTime(FracstableError):
    pass


class GridTooSmall(FracstableError):
    pass


class QuadratureNonConvergent(FracstableError):
    pass


class NotConverged(FracstableError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class InsufficientPoints(FracstableError):
    pass


class ConfigInvalid(FracstableError):
    pass


class TaskFailed(FracstableError):
    pass


class GateFailed(FracstableError):
    pass


class GateOverridden(UserWarning):
    """Warning emitted when a parameter gate is bypassed explicitly."""

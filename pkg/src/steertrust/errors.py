"""Exception hierarchy shared by every module of the package."""


class SteeringError(ValueError):
    """Base class for all domain errors raised by ``steertrust``."""


class NonHermitianInput(SteeringError):
    pass


class UnsupportedDimension(SteeringError):
    pass


class DimensionMismatch(SteeringError):
    pass


class LengthMismatch(SteeringError):
    pass


class OutOfRange(SteeringError):
    pass


class TargetUnreachable(SteeringError):
    pass


class ScenarioMismatch(SteeringError):
    pass


class NonRealValue(SteeringError):
    pass


class EnumerationTooLarge(SteeringError):
    pass


class InvalidState(SteeringError):
    """A matrix failed the density-matrix or assemblage invariants."""

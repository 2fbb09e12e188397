"""Exception types shared across the toolkit."""


class CavityCtlError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(CavityCtlError, ValueError):
    """Invalid layer geometry, region bounds, or unit scales."""


class DomainError(CavityCtlError, ValueError):
    """Argument outside the operation's admissible domain."""


class ResolutionError(CavityCtlError):
    """Grid too coarse for the requested evaluation (aliasing or undersampling)."""


class NumericDegeneracyError(CavityCtlError):
    """Internal numeric failure that cannot occur for valid lossless inputs."""


class ModelDomainError(CavityCtlError, ValueError):
    """Input outside the validity domain of the resonant ray-trace model."""


class GridMismatchError(CavityCtlError):
    """Operands were built on different frequency, space, or time grids."""


class LaunchPositionError(CavityCtlError):
    """Initial pulse support overlaps the stack or falls outside the window."""


class UndefinedQualityFactorError(CavityCtlError):
    """Ring-down constants requested for a structure with no reflection."""


class NumericInconsistencyError(CavityCtlError):
    """Computed values violate a guaranteed inequality beyond rounding."""


class ConfigError(CavityCtlError):
    """Scenario config failed to parse or is missing required keys."""

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

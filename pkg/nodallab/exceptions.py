"""nodallab exceptions."""


class NodalLabException(Exception):
    """nodallab base exception class."""


class ConfigError(NodalLabException, ValueError):
    """Experiment configuration is invalid (unknown key, bad value)."""


class ChartRangeError(NodalLabException, ValueError):
    """Chart coordinates outside the surface's declared ranges."""


class UnsupportedSurfaceError(NodalLabException):
    """Operation is not defined on this surface."""


class SpectrumError(NodalLabException):
    """Mode enumeration failed validation (missed or spurious zeros)."""


class MixedEigenvalueError(NodalLabException):
    """Modes combined into one EigenFn do not share an eigenvalue."""


class TruncationError(NodalLabException):
    """Spectral sum truncated below the required cutoff."""


class ZeroFieldError(NodalLabException):
    """Sampled field is identically zero."""


class SymmetryError(NodalLabException):
    """Function is neither even nor odd under the reflection fixing a curve."""


class NodalGraphError(NodalLabException):
    """Constructed nodal graph violates the Euler inequality."""


class OrderDetectionError(NodalLabException):
    """Circle-averaged decay does not match the requested vanishing order."""


class CriticalLevelError(NodalLabException):
    """Level is too close to a critical value."""


class CurveMismatchError(NodalLabException):
    """Nodal curves were extracted from a different function or grid."""


class InsufficientSpanError(NodalLabException):
    """Sweep does not span enough indices or frequencies to fit."""


class VanishingRestrictionError(NodalLabException):
    """Restriction to a curve vanishes identically."""


class AliasingError(NodalLabException):
    """Sample count does not resolve the restricted bandwidth."""


class OutsideTubeError(NodalLabException, ValueError):
    """Complex point lies outside the Grauert tube."""


class TubeChartError(NodalLabException):
    """√ρ of a constructed tube point disagrees with its construction."""


class GrowthBoundError(NodalLabException):
    """Growth rate exceeds the envelope bound."""


class BoundaryZeroError(NodalLabException):
    """Zero on a rectangle boundary survived every nudge."""


class ArgumentPrincipleError(NodalLabException):
    """Contour integral is not close to an integer."""


class SubdivisionDepthError(NodalLabException):
    """Zero isolation exceeded the subdivision depth limit."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial

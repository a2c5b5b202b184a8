"""Exception types raised by mpctv."""


class MPCTVError(Exception):
    """Base class for all package errors."""


class DimensionError(MPCTVError, ValueError):
    """Two buffers that must share a shape do not."""


class SingularityError(MPCTVError, ArithmeticError):
    """A formula hit a zero denominator that cannot be regularized away."""


class ConfigError(MPCTVError, ValueError):
    """Invalid solver, noise, or experiment configuration."""


class CalibrationError(MPCTVError, ValueError):
    """A noise model could not be calibrated for the given image."""


class ImageTooSmallError(MPCTVError, ValueError):
    """Image is below the minimum size the filter bank supports."""

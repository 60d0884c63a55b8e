class OctLioError(Exception):
    """
    Base class for exceptions in this package.
    """

    pass


class InputError(OctLioError):
    """Raised when an input value or sequence is malformed or violates constraints."""

    pass


class KeyRangeError(InputError):
    """Raised when a point quantizes to a voxel key outside the world bound."""

    pass


class ArgumentError(InputError):
    """Raised when a call argument (K, R, rate, resolution) is out of range."""

    pass


class TimestampError(InputError):
    """Raised when timestamps are non-monotone, uncovered, or cannot be associated."""

    pass


class ConfigError(OctLioError):
    """Raised when a configuration key is unknown or its value is invalid."""

    pass


class EstimationError(OctLioError):
    """
    Base class for failures of the state estimator.

    :ivar frame: index of the frame being processed, when known.
    """

    def __init__(self, message: str, frame: int | None = None) -> None:
        super().__init__(message)
        self.frame = frame

    def __str__(self) -> str:
        message = super().__str__()
        if self.frame is None:
            return message
        return "Frame {frame}: {message}".format(frame=self.frame, message=message)


class TrackingError(EstimationError):
    """Raised when too few valid point-to-plane correspondences are found."""

    pass


class DegeneracyError(EstimationError):
    """Raised when the normal equations of the update are singular."""

    pass


class InitializationError(EstimationError):
    """Raised when the static IMU window shows motion or is too short."""

    pass

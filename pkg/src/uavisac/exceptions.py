"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class WaveformOverrunError(ValueError):
    """The active waveform does not fit in the fast-time window."""


class TargetOverrunError(ValueError):
    """A target's range reached zero within the requested time."""


class UndefinedAnglesError(ValueError):
    pass


class InvalidGeometryError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class CleanDivergenceError(RuntimeError):
    """CLEAN residual peak failed to decrease between iterations."""


class ConfigError(ValueError):
    """Configuration could not be parsed or validated.

    ``key`` holds the dotted path of the offending entry (``None`` for
    whole-file parse failures).
    """

    def __init__(self, message, key=None):
        self.key = key
        if key:
            message = f"{key}: {message}"
        super().__init__(message)


class ProcessingError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")

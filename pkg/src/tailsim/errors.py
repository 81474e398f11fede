"""Exception types shared across the package."""


class TailsimError(Exception):
    """Base class for all package errors."""


class ParseError(TailsimError):
    """Config text could not be parsed."""


class ValidationError(TailsimError):
    """A parameter violates an invariant; message names the field."""

    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class ConfigError(TailsimError):
    """Bad run configuration (unknown scenario, unwritable output, ...)."""


class InfeasibleError(TailsimError):
    """Requested operating point is outside actuator limits."""


class StepSizeError(TailsimError):
    """Integration step too large for the requested fidelity."""


class InsufficientDataError(TailsimError):
    """Calibration trace too short or carries no signal."""


class DegenerateThrustError(TailsimError):
    """Thrust vector too small to define an attitude."""


class EmptyTraceError(TailsimError):
    """Metrics requested on an empty trace."""


class SimulationFault(TailsimError):
    """Non-finite state detected during simulation; carries the tick index."""

    def __init__(self, tick, message=""):
        self.tick = tick
        super().__init__(message or f"non-finite state at tick {tick}")

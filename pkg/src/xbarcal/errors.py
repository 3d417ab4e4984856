"""Exception and warning types shared across the simulator."""


class XbarcalError(Exception):
    """Base class for every error raised by this package."""


class DeviceStateError(XbarcalError):
    """An operation is not allowed in the cell's current state."""


class ModelValidityError(XbarcalError, ValueError):
    """An input falls outside the range where the behavioral model holds."""


class ProtocolError(XbarcalError, ValueError):
    """Malformed control frame, bitstream or opcode."""


class ConfigError(XbarcalError, ValueError):
    """Invalid experiment configuration."""


class LinearityWarning(UserWarning):
    """Body-bias voltage outside the linearized region."""


class SelectorLeakageWarning(UserWarning):
    """Selector off-conductance is not negligible against the HRS path."""

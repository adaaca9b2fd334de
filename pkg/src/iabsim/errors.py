"""Exception hierarchy shared across the simulator."""


class IabsimError(Exception):
    """Base class for all iabsim errors."""


class ConfigurationError(IabsimError):
    """Invalid scenario or experiment configuration."""


class ConsistencyError(IabsimError):
    """Mismatched inputs, e.g. a schedule applied to the wrong snapshot."""


class ShapeError(IabsimError):
    """Vector or network dimension mismatch."""


class CapacityError(IabsimError):
    """Input exceeds a fixed capacity, e.g. more links than state rows."""


class ActionError(IabsimError):
    """Action outside the valid action set."""


class NumericError(IabsimError):
    """Non-finite value encountered during training."""


class InsufficientDataError(IabsimError):
    """Not enough stored samples to draw a batch."""


class CheckpointError(IabsimError):
    """Corrupt, truncated or unsupported checkpoint file."""


class TraceFormatError(IabsimError):
    """Malformed day-trace file."""

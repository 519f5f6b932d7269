"""Exception types for the rebalancing simulator."""


class RebalanceError(Exception):
    """Base class for all simulator errors."""


class ParameterError(RebalanceError):
    """A parameter is out of its documented range."""


class UnsupportedConfigError(ParameterError):
    """The configuration is valid but outside what the protocol supports."""


class ProtocolViolationError(RebalanceError):
    """A node attempted a transmission it cannot legally produce."""


class DecodeFailureError(RebalanceError):
    """A receiver could not strip the known operands from a coded payload."""


class MergeFailureError(RebalanceError):
    """A node could not assemble a target segment it is supposed to hold."""

"""Exception hierarchy shared by all relqkd modules."""


class RelqkdError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(RelqkdError, ValueError):
    """An argument is outside its documented domain."""


class CausalityViolationError(RelqkdError):
    """A measurement was scheduled before light-speed propagation allows it."""


class ResourceExhaustedError(RelqkdError, RuntimeError):
    """A session ran out of raw material (sifted bits, blocks) after retrying."""


class RejectedInstrumentError(RelqkdError, ValueError):
    """A Kraus set violates the trace-non-increasing admissibility condition."""

"""Exception hierarchy shared by every module."""


class MfcorrError(Exception):
    """Base class for toolkit errors."""


class DomainError(MfcorrError, ValueError):
    """An argument lies outside the range an operation supports."""


class RangeError(DomainError):
    """A cached range (sieve limit, indicator prefix) is too short."""


class ResourceError(MfcorrError, RuntimeError):
    """A configured memory or enumeration budget would be exceeded."""


class DescriptorError(MfcorrError, ValueError):
    """A textual function, sequence or constant descriptor failed to parse."""


class DeterminismError(MfcorrError, RuntimeError):
    """A repeated computation produced a different value."""

"""Exception hierarchy shared by every module.

The CLI maps `DomainError` to exit code 1 and `ConsistencyError` to exit
code 2.
"""


class StavgError(Exception):
    """Base class for all package errors."""


class DomainError(StavgError, ValueError):
    """An argument lies outside the domain of the operation."""


class ReductionError(DomainError):
    """The curve has bad reduction at the requested prime."""


class RangeError(DomainError):
    """A table was queried outside the range it covers."""


class CapacityError(StavgError, MemoryError):
    """The requested table would exceed the configured capacity."""


class ConsistencyError(StavgError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class IntegrityError(ConsistencyError):
    """A persisted cache failed its checksum or structural checks."""

"""Exception types shared across the package.

Every error raised on purpose derives from :class:`ReachfemError`, so callers
(and the command line driver) can separate contract violations from genuine
bugs.
"""


class ReachfemError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ReachfemError):
    """Operands have incompatible shapes or dimensions."""


class EmptySetError(ReachfemError):
    """A set operation produced a provably empty set (negative radius)."""


class NumericError(ReachfemError):
    """A numerical computation produced non-finite values or failed to converge."""


class SingularMatrixError(NumericError):
    """A matrix that must be factorized is singular."""


class QueryError(ReachfemError):
    """A flowpipe was queried along a direction it cannot answer."""


class InsufficientDataError(ReachfemError):
    """Not enough crossings/peaks found to estimate the requested quantity."""


class InconsistentFlowpipeError(ReachfemError):
    """A flowpipe is malformed (gaps, empty sets) or too coarse to analyze."""


class ConfigError(ReachfemError):
    """A run configuration or system file is malformed."""

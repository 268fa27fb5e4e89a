"""Exception types shared across the package.

Plain precondition violations (bad shapes, out-of-range arguments) raise
``ValueError`` directly; the classes here mark failure modes a caller may
want to catch and handle, e.g. by retrying with a different seed or a
larger regularizer.
"""


class EsnoptError(Exception):
    """Base class for esnopt-specific failures."""


class IntegrationDivergedError(EsnoptError):
    """A delay-differential integration produced a non-finite state."""


class DivergedRealizationError(EsnoptError):
    """A generated recurrence blew up; retry with a different seed."""


class DegenerateSeriesError(EsnoptError):
    """A series has zero variance where nonzero variance is required."""


class InsufficientCoverageError(EsnoptError):
    """Too few populated phase bins to interpolate the empty ones."""


class SingularSystemError(EsnoptError):
    """Normal equations are singular; use a positive ridge penalty."""


class IllConditionedError(EsnoptError):
    """A kernel matrix stayed indefinite after maximum jitter."""


class OptimizationFailedError(EsnoptError):
    """Every objective evaluation failed; nothing to optimize."""

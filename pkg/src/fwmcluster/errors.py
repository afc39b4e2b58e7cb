"""Exception hierarchy shared by every module of the package."""


class FwmClusterError(Exception):
    """Base class for all package errors."""


class ValidationError(FwmClusterError, ValueError):
    """An input violates a documented precondition."""


class TopologyError(ValidationError):
    """A cascade description is cyclic, dangling or consumes a mode twice."""


class ConfigurationError(ValidationError):
    """Inconsistent run configuration (dimension mismatch, bad option)."""


class DimensionError(ValidationError):
    """Array or parameter vector has an unusable size."""


class InconsistencyError(FwmClusterError):
    """A numerical invariant that should hold by construction does not."""


class ConditioningError(FwmClusterError):
    """A matrix that must be inverted is numerically singular."""


class DegeneratePhaseError(FwmClusterError):
    """A homodyne phase is undefined because its diagonal entry vanishes."""


class OptimizationError(FwmClusterError):
    """The objective returned a non-finite value."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class SchemaError(ValidationError):
    """A JSON document does not match its schema.

    ``path`` is the dotted/indexed location of the offending field,
    e.g. ``cells[1].gain``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path

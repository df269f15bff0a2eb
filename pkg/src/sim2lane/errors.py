"""Exception hierarchy shared across the package."""


class Sim2LaneError(Exception):
    """Base class for all package errors."""


class ConfigurationError(Sim2LaneError):
    """A config value or combination of values is invalid."""


class ValidationError(Sim2LaneError):
    """Runtime data failed a contract check (shape, range, normalization)."""


class ParseError(Sim2LaneError):
    """A label or manifest file could not be parsed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LoadError(Sim2LaneError):
    """A dataset record references data that cannot be loaded."""


class MappingError(Sim2LaneError):
    """A raw lane class id is outside the declared class universe."""


class UndefinedMetricError(Sim2LaneError):
    """A metric was requested on data for which it is undefined."""


class BackendError(Sim2LaneError):
    """A dataset-generation backend is unavailable or unreachable."""


class UsageError(Sim2LaneError):
    """An operation was invoked in a way its contract forbids."""

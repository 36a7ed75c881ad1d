"""Exception hierarchy shared by the library and the CLI."""


class LevelSetError(Exception):
    """Base class for all library errors."""


class ConfigError(LevelSetError, ValueError):
    """Invalid configuration (bad bounds, counts, parameters)."""


class DataError(LevelSetError, ValueError):
    """Non-finite or malformed numerical data."""


class UsageError(LevelSetError, ValueError):
    """An operation was called outside its preconditions."""


class RangeError(UsageError):
    """A requested time lies outside the trajectory."""


class ResolutionError(UsageError):
    """Not enough snapshots to resolve a time window."""


class EmptyInterfaceError(LevelSetError, ValueError):
    """The field has no zero level."""


class NumericalBlowup(LevelSetError, ArithmeticError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, time: float, message: str | None = None):
        self.time = float(time)
        super().__init__(message or f"non-finite values at t={self.time:.6g}")

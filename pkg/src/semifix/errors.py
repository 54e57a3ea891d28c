"""Exception hierarchy shared by all modules."""


class SemifixError(Exception):
    """Base class for library errors."""


class ShapeError(SemifixError, ValueError):
    """Matrix or carrier dimensions do not fit together."""


class ConfigurationError(SemifixError, ValueError):
    """Invalid name, parameter or configuration entry.

    ``location`` is a dotted path into the offending config (``space.params.p``),
    empty when the error does not come from a config file.
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ModeError(SemifixError, ValueError):
    """Exhaustive checking requested on a space that cannot be enumerated."""


class PreconditionError(SemifixError, ValueError):
    """An operation was called on inputs that fail its stated precondition."""


class IterationCapError(SemifixError, RuntimeError):
    """An iteration count search ran past its cap."""

    def __init__(self, message: str, cap: int):
        self.cap = cap
        super().__init__(message)

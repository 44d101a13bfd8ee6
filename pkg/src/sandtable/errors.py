"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class SandtableError(Exception):
    """Base class for all errors raised by sandtable."""


class DomainError(SandtableError, ValueError):
    """A point or arc does not belong to the set it is required to lie in."""


class DegenerateRayError(SandtableError, ValueError):
    """A transport ray was requested at a point of the open boundary."""


class SingularityError(SandtableError, ValueError):
    """A quantity is unbounded at the requested point."""


class EmptySupportError(SandtableError, ValueError):
    """The source vanishes identically on the sampled support."""


class PreconditionError(SandtableError, ValueError):
    """An input violates a documented precondition."""


class GridMismatchError(SandtableError, ValueError):
    """Two fields were sampled on different lattices."""


class ConfigError(SandtableError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class InstabilityError(SandtableError, RuntimeError):
    """The explicit scheme produced a non-finite or negative value."""

    def __init__(self, message: str, step: int, state=None):
        super().__init__(f"{message} (step {step})")
        self.step = step
        self.state = state

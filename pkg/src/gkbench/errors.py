"""Exception types shared across the workbench."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all errors raised by gkbench."""


class ParseError(WorkbenchError):
    """Raised on malformed expression text; carries the offending position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ChartMismatchError(WorkbenchError):
    """Raised when objects over different charts are combined."""


class ValidationError(WorkbenchError):
    """Raised when a constructed object violates a structural invariant."""

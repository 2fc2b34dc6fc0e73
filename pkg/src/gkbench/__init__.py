"""gkbench: exact verification workbench for twisted generalized
complex and generalized Kahler structures on chart models."""

from .errors import ChartMismatchError, ParseError, ValidationError, WorkbenchError

__all__ = [
    "ChartMismatchError",
    "ParseError",
    "ValidationError",
    "WorkbenchError",
]

__version__ = "0.1.0"

#!/usr/bin/env python3
"""
Exception hierarchy for the cellular-automaton utilities.

Every error raised on purpose by ca_utils derives from CAError so the CLI
can report it with a single handler.
"""

from typing import Optional, Tuple


class CAError(Exception):
    """Base class for all ca_utils errors."""


class AlphabetMismatchError(CAError):
    """Two objects that must share an alphabet (or background) do not."""


class DimensionMismatchError(CAError):
    """Patterns of different shapes were compared."""


class FormatError(CAError):
    """A text file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class LibraryError(CAError):
    """A pattern library cannot be used for the requested operation."""


class ObstacleError(CAError):
    """An obstacle field is malformed; names the offending position."""

    def __init__(self, reason: str, position: Tuple[int, int]):
        self.reason = reason
        self.position = position
        super().__init__(f"{reason} at {position}")


class RoutingError(CAError):
    """A particle path cannot be built from the given start."""


class TuringMachineError(CAError):
    """Malformed Turing machine description."""


class TilingError(CAError):
    """Malformed tile set or tiling."""

# app/core/errors.py
from __future__ import annotations
from typing import Optional


class SwconnError(Exception):
    """Base class for every error raised by the toolkit."""


class StreamOrderError(SwconnError):
    """Edges are not in non-decreasing timestamp order."""

    def __init__(self, position: int, message: Optional[str] = None):
        self.position = position
        super().__init__(message or f"stream out of timestamp order at index {position}")

    def __reduce__(self):
        # sweep workers send errors back pickled
        return type(self), (self.position, str(self))


class PreconditionError(SwconnError):
    """A structural precondition of an index operation does not hold."""


class UnknownEdgeError(SwconnError):
    """Delete of an edge the index never stored (indexes that keep every live edge)."""


class DataError(SwconnError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)

    def __reduce__(self):
        return type(self), (self.reason, self.line)


class CorrectnessError(SwconnError):
    """Answers disagree with the oracle or across strategies."""

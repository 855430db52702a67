"""Exception hierarchy for hessbb.

Every error raised on purpose by the package derives from ``HessbbError`` so the
CLI can map it onto an exit code with a single ``except`` clause.
"""

from typing import Any, Optional, Sequence


class HessbbError(Exception):
    """Base class for all hessbb errors."""


class IntervalDomainError(HessbbError):
    """An interval operation was applied outside its domain."""

    def __init__(self, message: str, operand: Any = None):
        self.operand = operand
        if operand is not None:
            message = f"{message} (operand {operand})"
        super().__init__(message)


class ParseError(HessbbError):
    """Malformed expression or problem file text."""

    def __init__(self, message: str, position: Optional[int] = None, line: Optional[int] = None):
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        if where:
            message = f"{message} at {', '.join(where)}"
        super().__init__(message)


class EvaluationError(HessbbError):
    """Point or interval evaluation failed at a specific node."""

    def __init__(self, message: str, path: Sequence[str] = ()):
        self.path = tuple(path)
        location = "/".join(self.path) or "<root>"
        super().__init__(f"{message} at node {location}")


class UnsupportedNodeError(HessbbError):
    """An operation met a node it cannot handle, e.g. d|u|."""


class DegenerateIntervalError(HessbbError):
    """A non-degenerate interval was required."""


class InconsistentEnclosureError(HessbbError):
    """Intersection of enclosures that should all be sound came out empty."""


class VerificationError(HessbbError):
    """A constructed underestimator failed sampled verification."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class ProblemFileError(HessbbError):
    """Problem file is structurally invalid."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class ConfigurationError(HessbbError):
    """Invalid analysis settings."""


class UnsupportedDimensionError(HessbbError):
    """Operation is not defined for this number of variables."""

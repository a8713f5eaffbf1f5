"""Exception types raised across the package.

Each class also derives from the builtin a caller would naturally catch,
so ``except ValueError`` keeps working for input problems.
"""
from __future__ import annotations

from typing import Any, Iterable, List, Optional, Sequence, Tuple


class FracMomError(Exception):
    """Base class for every error raised by fracmom."""


class DimensionMismatchError(FracMomError, ValueError):
    pass


class ModeMismatchError(FracMomError, ValueError):
    pass


class NegativeComponentError(FracMomError, ValueError):
    pass


class DenominatorError(FracMomError, ValueError):
    """An exponent cannot be evaluated exactly at the given root power."""


class NonRealError(FracMomError, ValueError):
    pass


class NotSymmetricError(FracMomError, ValueError):
    pass


class TermLimitError(FracMomError, RuntimeError):
    pass


class ResourceLimitError(FracMomError, RuntimeError):
    pass


class ParseError(FracMomError, ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at offset {position}")
        self.message = message
        self.position = position


class MissingEntryError(FracMomError, KeyError):
    def __init__(self, alpha: Sequence[Any], beta: int, family: str = "delta") -> None:
        super().__init__((tuple(alpha), beta))
        self.alpha = tuple(alpha)
        self.beta = beta
        self.family = family

    def __str__(self) -> str:
        if self.family != "delta":
            return f"missing {self.family} value at {tuple(str(a) for a in self.alpha)}"
        return f"missing delta entry at {format_index(self.alpha, self.beta)}"


class CoverageError(FracMomError, ValueError):
    def __init__(self, missing: Iterable[Tuple[Sequence[Any], int]]) -> None:
        self.missing: List[Tuple[tuple, int]] = [(tuple(a), b) for a, b in missing]
        shown = ", ".join(format_index(a, b) for a, b in self.missing[:20])
        more = "" if len(self.missing) <= 20 else f" (+{len(self.missing) - 20} more)"
        super().__init__(f"{len(self.missing)} required entries missing: {shown}{more}")


class ProblemFileError(FracMomError, ValueError):
    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None) -> None:
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}, column {column}")
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)
        self.field = field
        self.line = line
        self.column = column


def format_index(alpha: Sequence[Any], beta: int) -> str:
    """Render an (alpha, beta) index: ``(2, 1)`` for n = 1, ``((1/2, 0), 1)`` otherwise."""
    if len(alpha) == 1:
        return f"({alpha[0]}, {beta})"
    parts = ", ".join(str(a) for a in alpha)
    return f"(({parts}), {beta})"

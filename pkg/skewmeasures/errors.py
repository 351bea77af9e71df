from typing import Optional, Sequence


class SkewMeasuresError(Exception):
    """Base class for all library errors"""


class DomainError(SkewMeasuresError, ValueError):
    """Argument outside the domain of an operation"""


class NumericError(SkewMeasuresError):
    """Numeric procedure failed to reach its tolerance"""

    def __init__(self, message: str, estimate: Optional[float] = None,
                 error_bound: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(NumericError):
    """Root bracket without a sign change"""


class MomentExistenceError(SkewMeasuresError):
    """Radial moment of the requested order does not exist"""

    def __init__(self, order: int, condition: str):
        super().__init__(f"moment of order {order} does not exist: {condition}")
        self.order = order
        self.condition = condition


class ValidationError(SkewMeasuresError, ValueError):
    """Distribution parameters violate a validity invariant"""


class NotPositiveDefiniteError(ValidationError):
    """Scale matrix is not symmetric positive definite"""


class ShapeBoundError(ValidationError):
    """delta' Omega^-1 delta is not below one"""


class ShapeComponentError(ValidationError):
    """A shape component lies outside [-1, 1]"""


class UnsupportedMarginalError(SkewMeasuresError):
    """Marginal density is not available in closed form for this family"""


class DegenerateSampleError(SkewMeasuresError):
    """Sample scatter matrix is singular or n <= k"""


class CsvParseError(SkewMeasuresError):
    """Malformed CSV input"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class TableNotFoundError(SkewMeasuresError):
    """Unknown table id requested"""

    def __init__(self, table_id: str, known: Sequence[str]):
        super().__init__(f"unknown table '{table_id}', known ids: {', '.join(known)}")
        self.table_id = table_id
        self.known = tuple(known)


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code"""
    if isinstance(error, NumericError):
        return 1
    if isinstance(error, OSError):
        return 3
    if isinstance(error, (SkewMeasuresError, ValueError)):
        return 2
    return 1

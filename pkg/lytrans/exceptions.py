from __future__ import annotations

from typing import Optional


class LyTransError(Exception):
    """Base class for lytrans-specific exceptions."""


# ----------------------------------------------------------------------
# Input and contract errors
# ----------------------------------------------------------------------
class ParseError(LyTransError):
    """Raised when an operator spec or command-line value cannot be parsed."""

    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None) -> None:
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(location)})" if location else message)
        self.line = line
        self.field = field


class ContractViolation(LyTransError):
    """Raised when a public operation is called outside its precondition."""


class InvalidWeight(ContractViolation):
    """Raised for zero weights or weight rules that define an unbounded operator."""

    def __init__(self, message: str, *, index: Optional[int] = None) -> None:
        super().__init__(message)
        self.index = index


class SpaceMismatch(ContractViolation):
    """Raised when a vector does not live in the operator's space."""


class UnsupportedStrategy(ContractViolation):
    """Raised when a generator strategy does not apply to an operator kind."""

    def __init__(self, message: str, *, strategy: Optional[str] = None) -> None:
        super().__init__(message)
        self.strategy = strategy


class EmptyRegion(ContractViolation):
    """Raised when the EigenInside candidate region has no points."""


class ZeroTranslation(ContractViolation):
    """Raised when circle geometry is requested for w = 0."""


class OutOfRange(ContractViolation):
    """Raised when claim machinery is asked for a layout without two intersections."""


class RegionMismatch(ContractViolation):
    """Raised when scans compared by a metamorphic law use incompatible grids."""


# ----------------------------------------------------------------------
# Numerical signals
# ----------------------------------------------------------------------
class NumericalError(LyTransError):
    """Base class for recoverable numerical signals."""


class NotPositiveDefinite(NumericalError):
    """Raised when a Cholesky pivot falls under the degeneracy threshold."""

    def __init__(self, message: str, *, pivot: float, index: int) -> None:
        super().__init__(message)
        self.pivot = pivot
        self.index = index


class NoConvergence(NumericalError):
    """Raised when the Jacobi sweep budget is exhausted."""

    def __init__(self, message: str, *, sweeps: int) -> None:
        super().__init__(message)
        self.sweeps = sweeps


class Overflow(NumericalError):
    """Raised when an iterate leaves the representable range."""

    def __init__(self, message: str, *, step: Optional[int] = None) -> None:
        super().__init__(message)
        self.step = step


class DegenerateBasis(NumericalError):
    """Raised when pruning leaves too few generators for a Gram analysis."""

    def __init__(self, message: str, *, kept: int) -> None:
        super().__init__(message)
        self.kept = kept


class HorizonTooSmall(NumericalError):
    """Raised when divergence is still building up at the end of the horizon."""

    def __init__(self, message: str, *, horizon: int, last_norm: float) -> None:
        super().__init__(message)
        self.horizon = horizon
        self.last_norm = last_norm


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------
class DataLockError(LyTransError):
    """Raised when the scan store cannot acquire the required file lock."""

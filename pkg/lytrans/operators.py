"""Operator families on l^2(N) and L^2[0, 2pi].

Operators are immutable descriptions. The constructor helpers ``translate`` and
``scale`` keep every operator in a normal form: a base (shift, diagonal, Kalisch
or direct sum), an optional scalar factor that only survives over the Kalisch
operator, and an optional translation. Weighted-shift iterates use exact weight
products evaluated in log space so overflow is detected before it happens.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, ClassVar, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from .constants import (
    EIGEN_GRID_POINTS,
    EIGEN_RADIUS_MARGIN,
    EIGEN_REGION_MARGIN,
    EIGEN_TRUNCATION,
    EXACT_TOL,
    KALISCH_NORM_BOUND,
    LOG_OVERFLOW,
    MAX_SEQUENCE_POWER,
    MODEL_TOL,
    NEUMANN_MAX_TERMS,
)
from .exceptions import (
    ContractViolation,
    EmptyRegion,
    InvalidWeight,
    NoConvergence,
    Overflow,
    SpaceMismatch,
    UnsupportedStrategy,
)
from .kalisch import SampledFunction, StepFunction, kalisch_apply, kalisch_iterate
from .numkit import check_finite
from .schema import OperatorSpec, WeightSpec, to_complex
from .specfile import parse_spec

logger = logging.getLogger(__name__)


class Space(str, Enum):
    SEQUENCE = "sequence"
    FUNCTION = "function"
    SUM = "sum"


# ----------------------------------------------------------------------
# Vectors
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SeqVector:
    """Finitely supported l^2(N) vector; coefficients[0] is coordinate 1."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.coefficients, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(data)):
            raise ContractViolation("sequence coefficients must be finite")
        nonzero = np.nonzero(data)[0]
        data = data[: nonzero[-1] + 1] if nonzero.size else data[:0]
        data.setflags(write=False)
        object.__setattr__(self, "coefficients", data)

    @classmethod
    def basis(cls, k: int) -> "SeqVector":
        if k < 1:
            raise ContractViolation(f"basis vectors are indexed from 1, got {k}")
        data = np.zeros(k, dtype=complex)
        data[k - 1] = 1.0
        return cls(data)

    @classmethod
    def zero(cls) -> "SeqVector":
        return cls(np.zeros(0, dtype=complex))

    @property
    def support(self) -> int:
        return int(self.coefficients.size)

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(max(size, self.support), dtype=complex)
        out[: self.support] = self.coefficients
        return out

    def inner(self, other: "SeqVector") -> complex:
        size = min(self.support, other.support)
        return complex(np.sum(self.coefficients[:size] * np.conj(other.coefficients[:size])))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def __add__(self, other: "SeqVector") -> "SeqVector":
        size = max(self.support, other.support)
        return SeqVector(self.padded(size) + other.padded(size))

    def __sub__(self, other: "SeqVector") -> "SeqVector":
        size = max(self.support, other.support)
        return SeqVector(self.padded(size) - other.padded(size))

    def __mul__(self, scalar: complex) -> "SeqVector":
        return SeqVector(self.coefficients * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class KernelVector:
    """The infinite vector coefficient * (1, ratio, ratio^2, ...), |ratio| < 1.

    It spans the kernel of B - c*ratio for a constant-weight c backward shift.
    """

    ratio: complex
    coefficient: complex = 1.0

    def __post_init__(self) -> None:
        if not abs(self.ratio) < 1.0:
            raise ContractViolation(f"kernel vector ratio must lie inside the unit disk, got {self.ratio}")

    def norm(self) -> float:
        return abs(self.coefficient) / math.sqrt(1.0 - abs(self.ratio) ** 2)

    def inner(self, other: Union["KernelVector", SeqVector]) -> complex:
        if isinstance(other, KernelVector):
            return self.coefficient * np.conj(other.coefficient) / (1.0 - self.ratio * np.conj(other.ratio))
        powers = self.ratio ** np.arange(other.support)
        return complex(self.coefficient * np.sum(powers * np.conj(other.coefficients)))

    def truncated(self) -> SeqVector:
        """Materialise coordinates until |ratio|^k drops below the truncation level."""
        if self.ratio == 0:
            return SeqVector(np.array([self.coefficient], dtype=complex))
        length = int(math.ceil(math.log(EIGEN_TRUNCATION) / math.log(abs(self.ratio)))) + 1
        return SeqVector(self.coefficient * self.ratio ** np.arange(length))

    def __mul__(self, scalar: complex) -> "KernelVector":
        return KernelVector(self.ratio, self.coefficient * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class SumVector:
    """Vector of a direct sum, one component per summand."""

    parts: Tuple[Any, ...]

    def inner(self, other: "SumVector") -> complex:
        if len(other.parts) != len(self.parts):
            raise SpaceMismatch("direct-sum vectors have different numbers of parts")
        return sum((_inner_pair(a, b) for a, b in zip(self.parts, other.parts)), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(norm(part) ** 2 for part in self.parts))

    def __add__(self, other: "SumVector") -> "SumVector":
        return SumVector(tuple(add(a, b) for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other: "SumVector") -> "SumVector":
        return SumVector(tuple(subtract(a, b) for a, b in zip(self.parts, other.parts)))

    def __mul__(self, scalar: complex) -> "SumVector":
        return SumVector(tuple(part * scalar for part in self.parts))

    __rmul__ = __mul__


Vector = Union[SeqVector, KernelVector, StepFunction, SampledFunction, SumVector]


def space_of(x: Any) -> Space:
    if isinstance(x, (SeqVector, KernelVector)):
        return Space.SEQUENCE
    if isinstance(x, (StepFunction, SampledFunction)):
        return Space.FUNCTION
    if isinstance(x, SumVector):
        return Space.SUM
    raise SpaceMismatch(f"not a vector: {type(x).__name__}")


def _as_sequence(x: Union[SeqVector, KernelVector]) -> SeqVector:
    return x.truncated() if isinstance(x, KernelVector) else x


def _inner_pair(u: Vector, v: Vector) -> complex:
    if space_of(u) != space_of(v):
        raise SpaceMismatch(f"cannot pair {space_of(u).value} with {space_of(v).value} vectors")
    if isinstance(u, KernelVector):
        return u.inner(v)
    if isinstance(v, KernelVector):
        return complex(np.conj(v.inner(u)))
    if isinstance(u, StepFunction) and isinstance(v, SampledFunction):
        return u.sample(v.panels).inner(v)
    if isinstance(u, SampledFunction) and isinstance(v, StepFunction):
        return u.inner(v.sample(u.panels))
    return complex(u.inner(v))


def inner(space: Space, u: Vector, v: Vector) -> complex:
    """<u, v>, linear in u and conjugate-linear in v."""
    for x in (u, v):
        if space_of(x) != space:
            raise SpaceMismatch(f"vector of type {type(x).__name__} is not in the {space.value} space")
    return _inner_pair(u, v)


def norm(x: Vector) -> float:
    return float(x.norm())


def add(u: Vector, v: Vector) -> Vector:
    if isinstance(u, KernelVector) and isinstance(v, KernelVector) and u.ratio == v.ratio:
        return KernelVector(u.ratio, u.coefficient + v.coefficient)
    if isinstance(u, (KernelVector, SeqVector)) and isinstance(v, (KernelVector, SeqVector)):
        return _as_sequence(u) + _as_sequence(v)
    if isinstance(u, StepFunction) and isinstance(v, SampledFunction):
        return u.sample(v.panels) + v
    if isinstance(u, SampledFunction) and isinstance(v, StepFunction):
        return u + v.sample(u.panels)
    if space_of(u) != space_of(v):
        raise SpaceMismatch("cannot add vectors from different spaces")
    return u + v


def subtract(u: Vector, v: Vector) -> Vector:
    return add(u, v * -1.0)


def combine(coefficients: Sequence[complex], vectors: Sequence[Vector]) -> Vector:
    """sum_i coefficients[i] * vectors[i]."""
    if not vectors or len(coefficients) != len(vectors):
        raise ContractViolation("combine needs one coefficient per vector")
    total = vectors[0] * complex(coefficients[0])
    for c, v in zip(coefficients[1:], vectors[1:]):
        total = add(total, v * complex(c))
    return total


def normalized(x: Vector) -> Vector:
    size = norm(x)
    if size == 0.0:
        raise ContractViolation("cannot normalise the zero vector")
    return x * (1.0 / size)


# ----------------------------------------------------------------------
# Weight rules
# ----------------------------------------------------------------------
def _clog(values: np.ndarray) -> np.ndarray:
    return np.log(np.asarray(values, dtype=complex))


@dataclass(frozen=True)
class WeightRule:
    """Weight sequence omega_1, omega_2, ... times an overall factor."""

    kind: str
    value: complex = 0j
    values: Tuple[complex, ...] = ()
    tail: complex = 0j
    factor: complex = 1.0 + 0j

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "list", "reciprocal", "geometric"):
            raise ContractViolation(f"unknown weight rule '{self.kind}'")
        if self.factor == 0:
            raise InvalidWeight("weight factor must be nonzero")
        if self.kind in ("constant", "geometric") and self.value == 0:
            raise InvalidWeight(f"{self.kind} weights must be nonzero", index=1)
        if self.kind == "geometric" and abs(self.value) > 1.0 + EXACT_TOL:
            raise InvalidWeight(f"geometric ratio {self.value} gives an unbounded shift")
        if self.kind == "list":
            for index, item in enumerate(self.values, start=1):
                if item == 0:
                    raise InvalidWeight(f"weight omega_{index} is zero", index=index)
            if not self.values or self.tail == 0:
                raise InvalidWeight("list weights need entries and a nonzero tail", index=len(self.values) + 1)

    @classmethod
    def from_spec(cls, spec: WeightSpec) -> "WeightRule":
        if spec.kind == "list":
            return cls("list", values=tuple(to_complex(v) for v in spec.values), tail=to_complex(spec.tail))
        if spec.kind == "reciprocal":
            return cls("reciprocal")
        return cls(spec.kind, value=to_complex(spec.value))

    def scaled(self, c: complex) -> "WeightRule":
        return replace(self, factor=self.factor * c)

    @property
    def constant_weight(self) -> Optional[complex]:
        """The common weight when every omega_n is the same number."""
        if self.kind == "constant":
            return self.value * self.factor
        return None

    def weights(self, start: int, count: int) -> np.ndarray:
        """omega_start .. omega_{start+count-1}."""
        k = np.arange(start, start + count)
        if self.kind == "constant":
            base = np.full(count, self.value, dtype=complex)
        elif self.kind == "reciprocal":
            base = 1.0 / k.astype(complex)
        elif self.kind == "geometric":
            base = np.exp(k * np.log(complex(self.value)))
        else:
            listed = np.asarray(self.values, dtype=complex)
            base = np.where(k <= listed.size, listed[np.minimum(k, listed.size) - 1], self.tail)
        return base * self.factor

    def log_products(self, start: np.ndarray, count: np.ndarray) -> np.ndarray:
        """Complex log of W(k, n) = omega_k * ... * omega_{k+n-1}, elementwise."""
        k = np.asarray(start, dtype=float)
        n = np.asarray(count, dtype=float)
        k, n = np.broadcast_arrays(k, n)
        if self.kind == "constant":
            logs = n * np.log(complex(self.value))
        elif self.kind == "reciprocal":
            logs = (gammaln(k) - gammaln(k + n)).astype(complex)
        elif self.kind == "geometric":
            logs = (n * k + n * (n - 1.0) / 2.0) * np.log(complex(self.value))
        else:
            listed = np.asarray(self.values, dtype=complex)
            prefix = np.concatenate(([0j], np.cumsum(_clog(listed))))
            size = listed.size
            end = k + n - 1.0
            upper = np.minimum(end, size).astype(int)
            lower = np.minimum(k - 1.0, size).astype(int)
            tail_count = np.maximum(0.0, end - np.maximum(k - 1.0, size))
            logs = np.where(upper > lower, prefix[np.maximum(upper, 0)] - prefix[np.maximum(lower, 0)], 0j)
            logs = logs + tail_count * np.log(complex(self.tail))
        return logs + n * np.log(complex(self.factor))

    @property
    def limit_modulus(self) -> float:
        """lim |omega_n|; the radius of the shift's spectrum."""
        if self.kind == "constant":
            return abs(self.value * self.factor)
        if self.kind == "list":
            return abs(self.tail * self.factor)
        if self.kind == "geometric" and abs(abs(self.value) - 1.0) <= EXACT_TOL:
            return abs(self.factor)
        return 0.0

    @property
    def sup_modulus(self) -> float:
        if self.kind == "constant":
            return abs(self.value * self.factor)
        if self.kind == "list":
            return max(max(abs(v) for v in self.values), abs(self.tail)) * abs(self.factor)
        if self.kind == "reciprocal":
            return abs(self.factor)
        return abs(self.value) * abs(self.factor)

    @property
    def inf_modulus(self) -> float:
        if self.kind == "list":
            return min(min(abs(v) for v in self.values), abs(self.tail)) * abs(self.factor)
        return self.limit_modulus

    @property
    def tends_to_zero(self) -> bool:
        return self.limit_modulus == 0.0

    def describe(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"rule": self.kind}
        if self.kind in ("constant", "geometric"):
            payload["value"] = _pair(self.value)
        if self.kind == "list":
            payload["values"] = [_pair(v) for v in self.values]
            payload["tail"] = _pair(self.tail)
        if self.factor != 1:
            payload["factor"] = _pair(self.factor)
        return payload


def _pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


# ----------------------------------------------------------------------
# Spectrum models
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ClosedDisk:
    center: complex
    radius: float

    def translate(self, shift: complex) -> "ClosedDisk":
        return ClosedDisk(self.center + shift, self.radius)

    def scale(self, c: complex) -> "ClosedDisk":
        return ClosedDisk(self.center * c, self.radius * abs(c))

    def meets_unit_circle(self, tol: float = MODEL_TOL) -> bool:
        distance = abs(self.center)
        return distance - self.radius <= 1.0 + tol and distance + self.radius >= 1.0 - tol

    def contains_zero(self, tol: float = MODEL_TOL) -> bool:
        return abs(self.center) <= self.radius + tol

    def max_modulus(self) -> float:
        return abs(self.center) + self.radius

    def describe(self) -> Dict[str, Any]:
        return {"shape": "ClosedDisk", "center": _pair(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def translate(self, shift: complex) -> "Circle":
        return Circle(self.center + shift, self.radius)

    def scale(self, c: complex) -> "Circle":
        return Circle(self.center * c, self.radius * abs(c))

    def meets_unit_circle(self, tol: float = MODEL_TOL) -> bool:
        distance = abs(self.center)
        return abs(distance - self.radius) <= 1.0 + tol and distance + self.radius >= 1.0 - tol

    def contains_zero(self, tol: float = MODEL_TOL) -> bool:
        return abs(abs(self.center) - self.radius) <= tol

    def max_modulus(self) -> float:
        return abs(self.center) + self.radius

    def describe(self) -> Dict[str, Any]:
        return {"shape": "Circle", "center": _pair(self.center), "radius": self.radius}


@dataclass(frozen=True)
class FinitePointClosure:
    """Closure of a sequence of points: the listed points plus their limit."""

    points: Tuple[complex, ...]

    def translate(self, shift: complex) -> "FinitePointClosure":
        return FinitePointClosure(tuple(p + shift for p in self.points))

    def scale(self, c: complex) -> "FinitePointClosure":
        return FinitePointClosure(tuple(p * c for p in self.points))

    def meets_unit_circle(self, tol: float = MODEL_TOL) -> bool:
        return any(abs(abs(p) - 1.0) <= tol for p in self.points)

    def contains_zero(self, tol: float = MODEL_TOL) -> bool:
        return any(abs(p) <= tol for p in self.points)

    def max_modulus(self) -> float:
        return max(abs(p) for p in self.points)

    def describe(self) -> Dict[str, Any]:
        return {"shape": "FinitePointClosure", "points": [_pair(p) for p in self.points]}


@dataclass(frozen=True)
class UnionModel:
    models: Tuple[Any, ...]

    def translate(self, shift: complex) -> "UnionModel":
        return UnionModel(tuple(m.translate(shift) for m in self.models))

    def scale(self, c: complex) -> "UnionModel":
        return UnionModel(tuple(m.scale(c) for m in self.models))

    def meets_unit_circle(self, tol: float = MODEL_TOL) -> bool:
        return any(m.meets_unit_circle(tol) for m in self.models)

    def contains_zero(self, tol: float = MODEL_TOL) -> bool:
        return any(m.contains_zero(tol) for m in self.models)

    def max_modulus(self) -> float:
        return max(m.max_modulus() for m in self.models)

    def describe(self) -> Dict[str, Any]:
        return {"shape": "Union", "models": [m.describe() for m in self.models]}


SpectrumModel = Union[ClosedDisk, Circle, FinitePointClosure, UnionModel]


# ----------------------------------------------------------------------
# Structural flags
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class OpenDisk:
    center: complex
    radius: float

    def meets_unit_circle(self) -> bool:
        return abs(self.center) - self.radius < 1.0 < abs(self.center) + self.radius

    def leaves_closed_unit_disk(self) -> bool:
        return abs(self.center) + self.radius > 1.0

    def describe(self) -> Dict[str, Any]:
        return {"center": _pair(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Flags:
    normal: bool = False
    compact: bool = False
    isometry: bool = False
    invertible: bool = False
    quasinilpotent: bool = False
    cowen_douglas: Optional[OpenDisk] = None
    adjoint_cowen_douglas: Optional[OpenDisk] = None
    norm_bound: float = math.inf
    lower_bound: float = 0.0

    def describe(self) -> Dict[str, Any]:
        return {
            "normal": self.normal,
            "compact": self.compact,
            "isometry": self.isometry,
            "invertible": self.invertible,
            "quasinilpotent": self.quasinilpotent,
            "cowen_douglas": self.cowen_douglas.describe() if self.cowen_douglas else None,
            "adjoint_cowen_douglas": self.adjoint_cowen_douglas.describe() if self.adjoint_cowen_douglas else None,
            "norm_bound": self.norm_bound,
            "lower_bound": self.lower_bound,
        }


def _spectral_flags(spectrum: SpectrumModel, **values: Any) -> Flags:
    return Flags(
        invertible=not spectrum.contains_zero(),
        quasinilpotent=spectrum.max_modulus() <= MODEL_TOL,
        **values,
    )


# ----------------------------------------------------------------------
# Operator kinds
# ----------------------------------------------------------------------
class Operator:
    """Common surface of every operator description."""

    kind: ClassVar[str] = ""

    @property
    def space(self) -> Space:
        raise NotImplementedError

    @cached_property
    def spectrum(self) -> SpectrumModel:
        return self._spectrum()

    @cached_property
    def flags(self) -> Flags:
        return self._flags()

    def _spectrum(self) -> SpectrumModel:
        raise NotImplementedError

    def _flags(self) -> Flags:
        raise NotImplementedError


@dataclass(frozen=True)
class ForwardShift(Operator):
    """(0, omega_1 x_1, omega_2 x_2, ...)."""

    weights: WeightRule
    kind: ClassVar[str] = "forward_shift"

    @property
    def space(self) -> Space:
        return Space.SEQUENCE

    def _spectrum(self) -> SpectrumModel:
        radius = self.weights.limit_modulus
        return ClosedDisk(0j, radius) if radius > 0.0 else FinitePointClosure((0j,))

    def _flags(self) -> Flags:
        radius = self.weights.limit_modulus
        unimodular = (
            abs(self.weights.sup_modulus - 1.0) <= EXACT_TOL and abs(self.weights.inf_modulus - 1.0) <= EXACT_TOL
        )
        return _spectral_flags(
            self.spectrum,
            compact=self.weights.tends_to_zero,
            isometry=unimodular,
            adjoint_cowen_douglas=OpenDisk(0j, radius) if radius > 0.0 else None,
            norm_bound=self.weights.sup_modulus,
            lower_bound=self.weights.inf_modulus,
        )


@dataclass(frozen=True)
class BackwardShift(Operator):
    """(omega_1 x_2, omega_2 x_3, ...)."""

    weights: WeightRule
    kind: ClassVar[str] = "backward_shift"

    @property
    def space(self) -> Space:
        return Space.SEQUENCE

    def _spectrum(self) -> SpectrumModel:
        radius = self.weights.limit_modulus
        return ClosedDisk(0j, radius) if radius > 0.0 else FinitePointClosure((0j,))

    def _flags(self) -> Flags:
        radius = self.weights.limit_modulus
        return _spectral_flags(
            self.spectrum,
            compact=self.weights.tends_to_zero,
            cowen_douglas=OpenDisk(0j, radius) if radius > 0.0 else None,
            norm_bound=self.weights.sup_modulus,
            lower_bound=0.0,
        )


@dataclass(frozen=True)
class Diagonal(Operator):
    """x_k -> d_k x_k, with d_k = tail beyond the listed entries."""

    entries: Tuple[complex, ...]
    tail: complex
    kind: ClassVar[str] = "diagonal"

    @property
    def space(self) -> Space:
        return Space.SEQUENCE

    def values(self, count: int) -> np.ndarray:
        listed = np.asarray(self.entries, dtype=complex)
        if count <= listed.size:
            return listed[:count]
        return np.concatenate((listed, np.full(count - listed.size, self.tail, dtype=complex)))

    def _spectrum(self) -> SpectrumModel:
        return FinitePointClosure(tuple(dict.fromkeys(self.entries + (self.tail,))))

    def _flags(self) -> Flags:
        moduli = [abs(v) for v in self.entries + (self.tail,)]
        return _spectral_flags(
            self.spectrum,
            normal=True,
            compact=abs(self.tail) <= EXACT_TOL,
            isometry=all(abs(m - 1.0) <= EXACT_TOL for m in moduli),
            norm_bound=max(moduli),
            lower_bound=min(moduli),
        )


@dataclass(frozen=True)
class Kalisch(Operator):
    kind: ClassVar[str] = "kalisch"

    @property
    def space(self) -> Space:
        return Space.FUNCTION

    def _spectrum(self) -> SpectrumModel:
        return Circle(0j, 1.0)

    def _flags(self) -> Flags:
        return _spectral_flags(self.spectrum, norm_bound=KALISCH_NORM_BOUND, lower_bound=0.0)


@dataclass(frozen=True)
class Scale(Operator):
    """factor * inner; in normal form inner is always the Kalisch operator."""

    inner: Operator
    factor: complex
    kind: ClassVar[str] = "scale"

    @property
    def space(self) -> Space:
        return self.inner.space

    def _spectrum(self) -> SpectrumModel:
        return self.inner.spectrum.scale(self.factor)

    def _flags(self) -> Flags:
        base = self.inner.flags
        c = self.factor
        cd = base.cowen_douglas
        acd = base.adjoint_cowen_douglas
        return _spectral_flags(
            self.spectrum,
            normal=base.normal,
            compact=base.compact,
            isometry=base.isometry and abs(abs(c) - 1.0) <= EXACT_TOL,
            cowen_douglas=OpenDisk(cd.center * c, cd.radius * abs(c)) if cd else None,
            adjoint_cowen_douglas=OpenDisk(acd.center * np.conj(c), acd.radius * abs(c)) if acd else None,
            norm_bound=base.norm_bound * abs(c),
            lower_bound=base.lower_bound * abs(c),
        )


@dataclass(frozen=True)
class Translate(Operator):
    """shift * I + inner."""

    inner: Operator
    shift: complex
    kind: ClassVar[str] = "translate"

    @property
    def space(self) -> Space:
        return self.inner.space

    def _spectrum(self) -> SpectrumModel:
        return self.inner.spectrum.translate(self.shift)

    def _flags(self) -> Flags:
        base = self.inner.flags
        lam = self.shift
        cd = base.cowen_douglas
        acd = base.adjoint_cowen_douglas
        return _spectral_flags(
            self.spectrum,
            normal=base.normal,
            compact=False,
            isometry=False,
            cowen_douglas=OpenDisk(cd.center + lam, cd.radius) if cd else None,
            adjoint_cowen_douglas=OpenDisk(acd.center + np.conj(lam), acd.radius) if acd else None,
            norm_bound=abs(lam) + base.norm_bound,
            lower_bound=max(0.0, abs(lam) - base.norm_bound, base.lower_bound - abs(lam)),
        )


@dataclass(frozen=True)
class DirectSum(Operator):
    parts: Tuple[Operator, ...]
    kind: ClassVar[str] = "direct_sum"

    @property
    def space(self) -> Space:
        return Space.SUM

    def _spectrum(self) -> SpectrumModel:
        return UnionModel(tuple(part.spectrum for part in self.parts))

    def _flags(self) -> Flags:
        flags = [part.flags for part in self.parts]
        return _spectral_flags(
            self.spectrum,
            normal=all(f.normal for f in flags),
            compact=all(f.compact for f in flags),
            isometry=all(f.isometry for f in flags),
            norm_bound=max(f.norm_bound for f in flags),
            lower_bound=min(f.lower_bound for f in flags),
        )


class NormalForm(NamedTuple):
    base: Operator
    factor: complex
    shift: complex


def normal_form(op: Operator) -> NormalForm:
    """Split op into (base, factor, shift) with op = shift + factor * base."""
    shift = 0j
    if isinstance(op, Translate):
        shift, op = op.shift, op.inner
    factor = 1.0 + 0j
    if isinstance(op, Scale):
        factor, op = op.factor, op.inner
    return NormalForm(op, factor, shift)


# ----------------------------------------------------------------------
# Constructors
# ----------------------------------------------------------------------
def translate(op: Operator, shift: complex) -> Operator:
    """shift + op, kept in normal form."""
    shift = check_finite(shift, name="lambda")
    if shift == 0:
        return op
    if isinstance(op, Translate):
        return translate(op.inner, op.shift + shift)
    if isinstance(op, DirectSum):
        return DirectSum(tuple(translate(part, shift) for part in op.parts))
    return Translate(op, shift)


def scale(op: Operator, factor: complex) -> Operator:
    """factor * op, folding the factor into weights and entries where possible."""
    factor = check_finite(factor, name="factor")
    if factor == 0:
        raise ContractViolation("scale factor must be nonzero")
    if factor == 1:
        return op
    if isinstance(op, (ForwardShift, BackwardShift)):
        return type(op)(op.weights.scaled(factor))
    if isinstance(op, Diagonal):
        return Diagonal(tuple(e * factor for e in op.entries), op.tail * factor)
    if isinstance(op, Kalisch):
        return Scale(op, factor)
    if isinstance(op, Scale):
        combined = op.factor * factor
        return op.inner if combined == 1 else Scale(op.inner, combined)
    if isinstance(op, Translate):
        return translate(scale(op.inner, factor), op.shift * factor)
    if isinstance(op, DirectSum):
        return DirectSum(tuple(scale(part, factor) for part in op.parts))
    raise ContractViolation(f"cannot scale {type(op).__name__}")


def build_operator(spec: OperatorSpec) -> Operator:
    """Turn a validated OperatorSpec into a normal-form operator."""
    if spec.kind == "forward_shift":
        return ForwardShift(WeightRule.from_spec(spec.weights))
    if spec.kind == "backward_shift":
        return BackwardShift(WeightRule.from_spec(spec.weights))
    if spec.kind == "diagonal":
        entries = tuple(to_complex(e) for e in spec.entries)
        tail = to_complex(spec.entries_tail) if spec.entries_tail is not None else entries[-1]
        return Diagonal(entries, tail)
    if spec.kind == "kalisch":
        return Kalisch()
    if spec.kind == "translate":
        return translate(build_operator(spec.inner), to_complex(spec.shift))
    if spec.kind == "scale":
        return scale(build_operator(spec.inner), to_complex(spec.factor))
    return DirectSum(tuple(build_operator(part) for part in spec.parts))


def make_operator(spec: Union[str, OperatorSpec]) -> Operator:
    """Build an operator from spec text or an already parsed OperatorSpec."""
    if isinstance(spec, str):
        spec = parse_spec(spec)
    op = build_operator(spec)
    logger.debug("built %s operator (spectrum %s)", op.kind, op.spectrum.describe()["shape"])
    return op


# ----------------------------------------------------------------------
# Action
# ----------------------------------------------------------------------
def _check_space(op: Operator, x: Vector) -> None:
    space = space_of(x)
    if space != op.space:
        raise SpaceMismatch(f"{op.kind} acts on {op.space.value} vectors, got {type(x).__name__}")
    if space == Space.SUM and len(x.parts) != len(op.parts):
        raise SpaceMismatch(f"direct sum has {len(op.parts)} parts, vector has {len(x.parts)}")


def _kernel_eigenvalue(op: Operator, x: KernelVector) -> Optional[complex]:
    """Eigenvalue of op on x when x is an exact eigenvector, else None."""
    base, factor, shift = normal_form(op)
    if isinstance(base, BackwardShift) and base.weights.constant_weight is not None:
        return shift + factor * base.weights.constant_weight * x.ratio
    return None


def apply(op: Operator, x: Vector) -> Vector:
    """T x."""
    _check_space(op, x)
    if isinstance(x, KernelVector):
        eigenvalue = _kernel_eigenvalue(op, x)
        if eigenvalue is not None:
            return x * eigenvalue
        x = x.truncated()
    if isinstance(op, DirectSum):
        return SumVector(tuple(apply(part, v) for part, v in zip(op.parts, x.parts)))
    if isinstance(op, Translate):
        return add(x * op.shift, apply(op.inner, x))
    if isinstance(op, Scale):
        return apply(op.inner, x) * op.factor
    if isinstance(op, Kalisch):
        return kalisch_apply(x)
    if isinstance(op, Diagonal):
        return SeqVector(op.values(x.support) * x.coefficients)
    if isinstance(op, ForwardShift):
        moved = op.weights.weights(1, x.support) * x.coefficients
        return SeqVector(np.concatenate(([0j], moved)))
    if isinstance(op, BackwardShift):
        if x.support <= 1:
            return SeqVector.zero()
        return SeqVector(op.weights.weights(1, x.support - 1) * x.coefficients[1:])
    raise ContractViolation(f"cannot apply {type(op).__name__}")


def _binomial_logs(n: int, j: np.ndarray, shift: complex) -> np.ndarray:
    logs = (gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)).astype(complex)
    if shift != 0:
        logs = logs + (n - j) * np.log(complex(shift))
    return logs


def _shift_power(base: Operator, shift: complex, n: int, x: SeqVector) -> SeqVector:
    """(shift + W)^n x for a weighted shift W, summed over the binomial expansion."""
    sources = np.nonzero(x.coefficients)[0] + 1
    if sources.size == 0:
        return SeqVector.zero()
    backward = isinstance(base, BackwardShift)
    if shift == 0:
        powers = np.array([n])
    else:
        top = min(n, int(sources.max()) - 1) if backward else n
        powers = np.arange(0, top + 1)
    m, j = np.meshgrid(sources, powers, indexing="ij")
    m, j = m.ravel(), j.ravel()
    if backward:
        keep = j <= m - 1
        m, j = m[keep], j[keep]
        if m.size == 0:
            return SeqVector.zero()
        targets = m - j
        weight_logs = base.weights.log_products(targets, j)
    else:
        targets = m + j
        weight_logs = base.weights.log_products(m, j)
    logs = _binomial_logs(n, j, shift) + weight_logs + np.log(x.coefficients[m - 1])
    peak = float(np.max(logs.real))
    if peak > LOG_OVERFLOW:
        raise Overflow(f"(lambda + W)^{n} x exceeds {math.exp(LOG_OVERFLOW):.0e}", step=n)
    out = np.zeros(int(targets.max()), dtype=complex)
    np.add.at(out, targets - 1, np.exp(logs))
    return SeqVector(out)


def _diagonal_power(base: Diagonal, shift: complex, n: int, x: SeqVector) -> SeqVector:
    bases = shift + base.values(x.support)
    live = x.coefficients != 0
    if np.any(live):
        with np.errstate(divide="ignore"):
            growth = n * np.log(np.abs(bases[live])) + np.log(np.abs(x.coefficients[live]))
        if np.max(growth) > LOG_OVERFLOW:
            raise Overflow(f"diagonal power {n} exceeds the representable range", step=n)
    return SeqVector(bases**n * x.coefficients)


def iterate(op: Operator, n: int, x: Vector) -> Vector:
    """T^n x in closed form."""
    _check_space(op, x)
    n = int(n)
    if n < 0:
        raise ContractViolation("iterate takes n >= 0; use inverse_apply for negative powers")
    if n == 0:
        return x
    if isinstance(op, DirectSum):
        return SumVector(tuple(iterate(part, n, v) for part, v in zip(op.parts, x.parts)))
    base, factor, shift = normal_form(op)
    if isinstance(base, Kalisch):
        return kalisch_iterate(shift, n, x, factor=factor)
    if n > MAX_SEQUENCE_POWER:
        raise ContractViolation(f"sequence iterates are limited to n <= {MAX_SEQUENCE_POWER}")
    if isinstance(x, KernelVector):
        eigenvalue = _kernel_eigenvalue(op, x)
        if eigenvalue is not None:
            if eigenvalue != 0 and n * math.log(abs(eigenvalue)) + math.log(abs(x.coefficient)) > LOG_OVERFLOW:
                raise Overflow(f"eigen-orbit exceeds the representable range at n = {n}", step=n)
            return x * eigenvalue**n
        x = x.truncated()
    if isinstance(base, Diagonal):
        return _diagonal_power(base, shift, n, x)
    if isinstance(base, (ForwardShift, BackwardShift)):
        return _shift_power(base, shift, n, x)
    raise ContractViolation(f"cannot iterate {type(op).__name__}")


def spectral_radius(op: Operator) -> float:
    return float(op.spectrum.max_modulus())


# ----------------------------------------------------------------------
# Inverse
# ----------------------------------------------------------------------
def _neumann(base: Operator, shift: complex, x: SeqVector) -> SeqVector:
    """(shift + W)^{-1} x = shift^{-1} sum_k (-W/shift)^k x."""
    term = x * (1.0 / shift)
    total = term
    for count in range(1, NEUMANN_MAX_TERMS + 1):
        term = apply(base, term) * (-1.0 / shift)
        if term.norm() == 0.0:
            return total
        total = total + term
        if term.norm() <= 1e-17 * total.norm():
            logger.debug("neumann expansion converged after %d terms", count)
            return total
    raise NoConvergence(
        f"Neumann expansion did not converge in {NEUMANN_MAX_TERMS} terms", sweeps=NEUMANN_MAX_TERMS
    )


def inverse_apply(op: Operator, x: Vector) -> Vector:
    """T^{-1} x for operators whose spectrum model excludes 0."""
    _check_space(op, x)
    if op.spectrum.contains_zero():
        raise ContractViolation(f"{op.kind} is not invertible: its spectrum contains 0")
    if isinstance(op, DirectSum):
        return SumVector(tuple(inverse_apply(part, v) for part, v in zip(op.parts, x.parts)))
    base, factor, shift = normal_form(op)
    if isinstance(base, Kalisch):
        if not isinstance(x, StepFunction):
            raise ContractViolation("the Kalisch inverse is available for step functions only")
        return kalisch_iterate(shift, -1, x, factor=factor)
    if isinstance(x, KernelVector):
        eigenvalue = _kernel_eigenvalue(op, x)
        if eigenvalue is not None:
            return x * (1.0 / eigenvalue)
        x = x.truncated()
    if isinstance(base, Diagonal):
        return SeqVector(x.coefficients / (shift + base.values(x.support)))
    return _neumann(base, shift, x)


# ----------------------------------------------------------------------
# Generator families
# ----------------------------------------------------------------------
class Strategy(str, Enum):
    BASIS = "Basis"
    EIGEN_INSIDE = "EigenInside"
    EIGEN_FRAME = "EigenFrame"
    INVERSE_ORBIT = "InverseOrbit"


@dataclass(frozen=True)
class GeneratorFamily:
    strategy: Strategy
    level: int
    vectors: Tuple[Any, ...]
    eigenvalues: Optional[Tuple[complex, ...]] = None


def _sequence_only(op: Operator) -> bool:
    if isinstance(op, DirectSum):
        return all(_sequence_only(part) for part in op.parts)
    return op.space == Space.SEQUENCE


def _basis_vectors(op: Operator, m: int) -> List[Vector]:
    if not isinstance(op, DirectSum):
        return [SeqVector.basis(k) for k in range(1, m + 1)]
    count = len(op.parts)
    vectors = []
    for index in range(m):
        part, k = index % count, index // count + 1
        components = [
            _basis_vectors(p, k)[-1] if i == part else _zero_like(p) for i, p in enumerate(op.parts)
        ]
        vectors.append(SumVector(tuple(components)))
    return vectors


def _zero_like(op: Operator) -> Vector:
    if isinstance(op, DirectSum):
        return SumVector(tuple(_zero_like(part) for part in op.parts))
    if op.space == Space.FUNCTION:
        return StepFunction.zero()
    return SeqVector.zero()


def _seed_vector(op: Operator) -> Vector:
    if isinstance(op, DirectSum):
        return SumVector(tuple(_seed_vector(part) for part in op.parts))
    if op.space == Space.FUNCTION:
        return StepFunction.indicator(math.pi)
    return SeqVector.basis(1)


def _eigen_inside(op: Operator, m: int) -> GeneratorFamily:
    """Kernel vectors of lambda + B whose eigenvalues lie inside the unit disk.

    Any eigenvalue with |lambda + mu| < 1 qualifies. The search is narrowed to
    |lambda + mu| < EIGEN_REGION_MARGIN and |mu| <= EIGEN_RADIUS_MARGIN * |c|:
    eigenvalues at the unit circle decay too slowly to dip within a finite
    horizon, and ratios near the disk edge give kernel vectors with tens of
    thousands of coordinates. Both margins only shrink the search; every
    vector returned is an exact eigenvector.
    """
    base, factor, shift = normal_form(op)
    weight = base.weights.constant_weight if isinstance(base, BackwardShift) else None
    if weight is None or factor != 1:
        raise UnsupportedStrategy(
            "EigenInside needs a translate of a constant-weight backward shift", strategy=Strategy.EIGEN_INSIDE.value
        )
    reach = abs(weight)
    axis = np.linspace(-reach, reach, EIGEN_GRID_POINTS)
    grid = (axis[None, :] + 1j * axis[:, None]).ravel()
    keep = (np.abs(grid) <= EIGEN_RADIUS_MARGIN * reach) & (np.abs(shift + grid) < EIGEN_REGION_MARGIN)
    candidates = grid[keep]
    if candidates.size == 0:
        raise EmptyRegion(f"no eigenvalue |lambda + mu| < {EIGEN_REGION_MARGIN} for lambda = {shift}")
    # farthest-point traversal from the most strongly contracting candidate
    chosen = [int(np.argmin(np.abs(shift + candidates)))]
    distance = np.abs(candidates - candidates[chosen[0]])
    while len(chosen) < min(m, candidates.size):
        nxt = int(np.argmax(distance))
        chosen.append(nxt)
        distance = np.minimum(distance, np.abs(candidates - candidates[nxt]))
    vectors, eigenvalues = [], []
    for index in chosen:
        mu = candidates[index]
        ratio = mu / weight
        vectors.append(KernelVector(ratio, math.sqrt(1.0 - abs(ratio) ** 2)))
        eigenvalues.append(complex(shift + mu))
    return GeneratorFamily(Strategy.EIGEN_INSIDE, m, tuple(vectors), tuple(eigenvalues))


def frame_angles(m: int) -> np.ndarray:
    """alpha_j = 2 pi j / (m + 1), j = 1..m."""
    return 2.0 * math.pi * np.arange(1, m + 1) / (m + 1)


def generators(op: Operator, strategy: Union[Strategy, str], m: int) -> GeneratorFamily:
    """m unit vectors of the requested strategy."""
    strategy = Strategy(strategy)
    if m < 1:
        raise ContractViolation("generator level must be positive")
    if strategy == Strategy.BASIS:
        if not _sequence_only(op):
            raise UnsupportedStrategy("Basis needs a sequence operator", strategy=strategy.value)
        return GeneratorFamily(strategy, m, tuple(_basis_vectors(op, m)))
    if strategy == Strategy.EIGEN_INSIDE:
        return _eigen_inside(op, m)
    if strategy == Strategy.EIGEN_FRAME:
        base, factor, shift = normal_form(op)
        if not isinstance(base, Kalisch):
            raise UnsupportedStrategy("EigenFrame needs the Kalisch operator", strategy=strategy.value)
        alphas = frame_angles(m)
        vectors = tuple(StepFunction.indicator(alpha).normalized() for alpha in alphas)
        eigenvalues = tuple(complex(shift + factor * np.exp(1j * alpha)) for alpha in alphas)
        return GeneratorFamily(strategy, m, vectors, eigenvalues)
    if not op.flags.invertible:
        raise UnsupportedStrategy(f"InverseOrbit needs an invertible operator, {op.kind} is not", strategy=strategy.value)
    current = _seed_vector(op)
    vectors = []
    for _ in range(m):
        current = normalized(inverse_apply(op, current))
        vectors.append(current)
    return GeneratorFamily(strategy, m, tuple(vectors))


# ----------------------------------------------------------------------
# Metadata
# ----------------------------------------------------------------------
def _kind_tree(op: Operator) -> Dict[str, Any]:
    node: Dict[str, Any] = {"kind": op.kind}
    if isinstance(op, (ForwardShift, BackwardShift)):
        node["weights"] = op.weights.describe()
    elif isinstance(op, Diagonal):
        node["entries"] = [_pair(e) for e in op.entries]
        node["tail"] = _pair(op.tail)
    elif isinstance(op, Translate):
        node["lambda"] = _pair(op.shift)
        node["inner"] = _kind_tree(op.inner)
    elif isinstance(op, Scale):
        node["factor"] = _pair(op.factor)
        node["inner"] = _kind_tree(op.inner)
    elif isinstance(op, DirectSum):
        node["parts"] = [_kind_tree(part) for part in op.parts]
    return node


def describe(op: Operator) -> Dict[str, Any]:
    """Metadata document: kind tree, space, flags, spectrum model, spectral radius."""
    return {
        "operator": _kind_tree(op),
        "space": op.space.value,
        "flags": op.flags.describe(),
        "spectrum": op.spectrum.describe(),
        "spectral_radius": spectral_radius(op),
    }

from __future__ import annotations

import hashlib
import json
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from .constants import (
    DEFAULT_HORIZON,
    DEFAULT_LEVELS,
    DEFAULT_PANELS,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DIP_EPSILON,
    MAX_RESOLUTION,
    MIN_PANELS,
)

ComplexPair = Tuple[float, float]

OperatorKind = Literal[
    "forward_shift",
    "backward_shift",
    "diagonal",
    "kalisch",
    "translate",
    "scale",
    "direct_sum",
]


def as_pair(value: Any) -> ComplexPair:
    """Coerce a complex number or a (re, im) pair into a pair of floats."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex values need exactly two components")
        return float(value[0]), float(value[1])
    number = complex(value)
    return number.real, number.imag


def to_complex(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


class Budget(BaseModel):
    """Search budget shared by the classifier, claims and scans."""

    horizon: int = DEFAULT_HORIZON
    levels: int = DEFAULT_LEVELS
    trials: int = DEFAULT_TRIALS
    panels: int = DEFAULT_PANELS
    seed: int = DEFAULT_SEED
    dip_epsilon: float = DIP_EPSILON
    workers: int = 1

    model_config = {
        "populate_by_name": True,
        "extra": "ignore",
        "frozen": True,
    }

    @field_validator("horizon")
    @classmethod
    def _check_horizon(cls, value: int) -> int:
        if value < 64:
            raise ValueError("horizon must be at least 64")
        return value

    @field_validator("levels", "trials", "workers")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be positive")
        return value

    @field_validator("panels")
    @classmethod
    def _check_panels(cls, value: int) -> int:
        if value < MIN_PANELS or value & (value - 1):
            raise ValueError(f"panels must be a power of two >= {MIN_PANELS}")
        return value

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if value < 0:
            raise ValueError("seed must be non-negative")
        return value

    @field_validator("dip_epsilon")
    @classmethod
    def _check_epsilon(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("dip_epsilon must be positive")
        return value

    def with_seed(self, seed: int) -> "Budget":
        return self.model_copy(update={"seed": seed})

    def to_serialisable(self) -> Dict[str, Any]:
        """Everything that can change a verdict; the worker count cannot."""
        return self.model_dump(mode="json", exclude={"workers"})


class ScanRegion(BaseModel):
    center: ComplexPair = (0.0, 0.0)
    half_width: float
    half_height: float
    resolution: int

    model_config = {
        "populate_by_name": True,
        "extra": "ignore",
        "frozen": True,
    }

    @field_validator("center", mode="before")
    @classmethod
    def _coerce_center(cls, value: Any) -> ComplexPair:
        return as_pair(value)

    @field_validator("half_width", "half_height")
    @classmethod
    def _check_half_size(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("half sizes must be positive")
        return value

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: int) -> int:
        if value < 1 or value % 2 == 0 or value > MAX_RESOLUTION:
            raise ValueError(f"resolution must be odd and at most {MAX_RESOLUTION}")
        return value

    def shifted(self, offset: complex) -> "ScanRegion":
        """Same grid with its center moved by offset."""
        center = to_complex(self.center) + offset
        return self.model_copy(update={"center": (center.real, center.imag)})


class WeightSpec(BaseModel):
    kind: Literal["constant", "list", "reciprocal", "geometric"]
    value: Optional[ComplexPair] = None
    values: List[ComplexPair] = Field(default_factory=list)
    tail: Optional[ComplexPair] = None

    model_config = {
        "populate_by_name": True,
        "extra": "ignore",
    }

    @field_validator("value", "tail", mode="before")
    @classmethod
    def _coerce_scalar(cls, value: Any) -> Optional[ComplexPair]:
        return None if value is None else as_pair(value)

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value: Any) -> List[ComplexPair]:
        return [as_pair(item) for item in value or []]

    @model_validator(mode="after")
    def _check_shape(self) -> "WeightSpec":
        if self.kind in ("constant", "geometric") and self.value is None:
            raise ValueError(f"{self.kind} weights need a value")
        if self.kind == "list" and (not self.values or self.tail is None):
            raise ValueError("list weights need values and a tail")
        return self


class OperatorSpec(BaseModel):
    """Declarative operator description; the input of make_operator."""

    kind: OperatorKind
    weights: Optional[WeightSpec] = None
    entries: List[ComplexPair] = Field(default_factory=list)
    entries_tail: Optional[ComplexPair] = None
    shift: Optional[ComplexPair] = Field(default=None, alias="lambda")
    factor: Optional[ComplexPair] = None
    inner: Optional["OperatorSpec"] = None
    parts: List["OperatorSpec"] = Field(default_factory=list)

    model_config = {
        "populate_by_name": True,
        "extra": "ignore",
    }

    @field_validator("shift", "factor", "entries_tail", mode="before")
    @classmethod
    def _coerce_scalar(cls, value: Any) -> Optional[ComplexPair]:
        return None if value is None else as_pair(value)

    @field_validator("entries", mode="before")
    @classmethod
    def _coerce_entries(cls, value: Any) -> List[ComplexPair]:
        return [as_pair(item) for item in value or []]

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "OperatorSpec":
        if self.kind in ("forward_shift", "backward_shift") and self.weights is None:
            raise ValueError(f"{self.kind} needs weights")
        if self.kind == "diagonal" and not self.entries:
            raise ValueError("diagonal needs entries")
        if self.kind == "translate" and (self.inner is None or self.shift is None):
            raise ValueError("translate needs inner and lambda")
        if self.kind == "scale" and (self.inner is None or self.factor is None):
            raise ValueError("scale needs inner and factor")
        if self.kind == "direct_sum" and not self.parts:
            raise ValueError("direct_sum needs parts")
        return self

    def to_serialisable(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True, exclude_defaults=True)

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_serialisable(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def translated(self, shift: complex) -> "OperatorSpec":
        return OperatorSpec(kind="translate", inner=self, shift=(shift.real, shift.imag))


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------
class ClaimOutcome(BaseModel):
    claim: int
    passed: bool
    witness_n: Optional[int] = None
    max_ratio: float = 0.0
    trials: int = 0
    detail: str = ""

    model_config = {"extra": "ignore"}


class ClaimReport(BaseModel):
    w: ComplexPair
    horizon: int
    layout: Literal["outside", "inside"]
    constants: Dict[str, float]
    claims: List[ClaimOutcome]

    model_config = {"extra": "ignore"}

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.claims)

    def to_serialisable(self) -> Dict[str, Any]:
        payload = self.model_dump(mode="json")
        payload["passed"] = self.passed
        return payload


class TnReport(BaseModel):
    w: ComplexPair
    max_power: int
    panels: int
    trials: int
    max_relative_error: float
    tolerance: float

    model_config = {"extra": "ignore"}

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance


class MetamorphicReport(BaseModel):
    law: Literal["translation", "union"]
    compared: int
    ignored: int
    disagreements: List[Tuple[int, int]] = Field(default_factory=list)

    model_config = {"extra": "ignore"}

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def to_serialisable(self) -> Dict[str, Any]:
        payload = self.model_dump(mode="json")
        payload["passed"] = self.passed
        return payload


OperatorSpec.model_rebuild()

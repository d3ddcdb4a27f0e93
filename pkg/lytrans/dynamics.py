"""Orbit statistics and subspace filtrations.

Orbits are sampled, not walked: every n up to DENSE_PREFIX, then a fixed number
of times per dyadic window, then the horizon itself. Restricted norms
||T^n|_V|| come from the generalised eigenvalues of (G_n, G_0) where
G_n[i, j] = <T^n g_i, T^n g_j>.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    DENSE_PREFIX,
    DIP_EPSILON,
    GRAM_NORM_LIMIT,
    MAX_HORIZON,
    WINDOW_SAMPLES,
)
from .exceptions import ContractViolation, DegenerateBasis, NotPositiveDefinite, Overflow
from .numkit import HermMatrix, cholesky, gen_eigh
from .operators import Operator, Vector, inner, iterate, norm, space_of, subtract

logger = logging.getLogger(__name__)

MIN_NORM = 1e-6
MAX_NORM = 1e6


def sample_times(horizon: int) -> np.ndarray:
    """0..min(N, 64), WINDOW_SAMPLES times per dyadic window past 64, and N."""
    if horizon < 0:
        raise ContractViolation("horizon must be non-negative")
    times = set(range(0, min(horizon, DENSE_PREFIX) + 1))
    start = DENSE_PREFIX
    while start <= horizon:
        end = min(2 * start, horizon + 1)
        times.update(int(t) for t in np.linspace(start, end - 1, WINDOW_SAMPLES).round())
        start *= 2
    times.add(horizon)
    return np.array(sorted(times), dtype=int)


def dyadic_windows(horizon: int) -> List[Tuple[int, int]]:
    """[2^j, 2^{j+1}) clipped to n <= horizon."""
    windows = []
    start = 1
    while start <= horizon:
        windows.append((start, min(2 * start, horizon + 1)))
        start *= 2
    return windows


# ----------------------------------------------------------------------
# Orbit records
# ----------------------------------------------------------------------
@dataclass
class OrbitRecord:
    horizon: int
    times: np.ndarray
    norms: np.ndarray
    window_minima: np.ndarray = field(init=False)
    window_maxima: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=int)
        self.norms = np.asarray(self.norms, dtype=float)
        minima, maxima = [], []
        for lo, hi in dyadic_windows(self.horizon):
            inside = self.norms[(self.times >= lo) & (self.times < hi)]
            if inside.size:
                minima.append(float(np.min(inside)))
                maxima.append(float(np.max(inside)))
        self.window_minima = np.array(minima)
        self.window_maxima = np.array(maxima)

    def norm_at(self, n: int) -> float:
        index = np.searchsorted(self.times, n)
        if index >= self.times.size or self.times[index] != n:
            raise ContractViolation(f"n = {n} is not a sampled time")
        return float(self.norms[index])

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"n": int(n), "norm": float(v)} for n, v in zip(self.times, self.norms)]


def orbit_of_sequence(norm_at: Callable[[int], float], horizon: int) -> OrbitRecord:
    """Sample norm_at over the schedule; Overflow marks the rest of the orbit +inf."""
    times = sample_times(horizon)
    norms = np.full(times.size, np.inf)
    for index, n in enumerate(times):
        try:
            norms[index] = norm_at(int(n))
        except Overflow as exc:
            logger.debug("orbit overflowed at n = %d: %s", n, exc)
            break
    return OrbitRecord(horizon=horizon, times=times, norms=norms)


def orbit(op: Operator, x: Vector, horizon: int) -> OrbitRecord:
    """||T^n x|| over the sampling schedule up to horizon."""
    size = norm(x)
    if not MIN_NORM <= size <= MAX_NORM:
        raise ContractViolation(f"orbit seed norm {size:.3e} outside [{MIN_NORM}, {MAX_NORM}]")
    return orbit_of_sequence(lambda n: norm(iterate(op, n, x)), horizon)


# ----------------------------------------------------------------------
# Dip classification
# ----------------------------------------------------------------------
class DipKind(str, Enum):
    RECURRING_TO_ZERO = "RecurringToZero"
    RECURRING_BOUNDED_BELOW = "RecurringBoundedBelow"
    SINGLE_DIP_THEN_GROWTH = "SingleDipThenGrowth"
    NO_DIP = "NoDip"


@dataclass(frozen=True)
class DipVerdict:
    kind: DipKind
    level: Optional[float] = None


def _recurring_to_zero(minima: np.ndarray, dip_epsilon: float) -> bool:
    if minima.size < 3:
        return False
    last = minima[-3:]
    descending = all(b < a or b == 0.0 for a, b in zip(last[:-1], last[1:]))
    return descending and last[-1] <= dip_epsilon


def _single_dip_then_growth(rec: OrbitRecord) -> bool:
    finite = np.where(np.isfinite(rec.norms), rec.norms, np.inf)
    dip = int(np.argmin(finite))
    dip_time = int(rec.times[dip])
    if dip_time == 0:
        return False
    later = [
        float(np.min(rec.norms[(rec.times >= lo) & (rec.times < hi)]))
        for lo, hi in dyadic_windows(rec.horizon)
        if lo > dip_time and np.any((rec.times >= lo) & (rec.times < hi))
    ]
    if len(later) < 2:
        return False
    # an overflowed window (inf) keeps growing
    return later[0] > finite[dip] and all(b > a or math.isinf(b) for a, b in zip(later[:-1], later[1:]))


def dip_classify(rec: OrbitRecord, dip_epsilon: float = DIP_EPSILON) -> DipVerdict:
    """Finite-horizon proxy for 'has a subsequence tending to zero'."""
    if rec.horizon < 64:
        raise ContractViolation("dip classification needs a horizon of at least 64")
    if _recurring_to_zero(rec.window_minima, dip_epsilon):
        return DipVerdict(DipKind.RECURRING_TO_ZERO)
    if _single_dip_then_growth(rec):
        return DipVerdict(DipKind.SINGLE_DIP_THEN_GROWTH)
    norms = rec.norms
    running_max = np.maximum.accumulate(norms)
    tail = norms[1:]
    dipped = np.any(tail < 0.5 * running_max[:-1])
    floor = float(np.min(tail)) if tail.size else float(norms[0])
    if dipped and floor > dip_epsilon:
        return DipVerdict(DipKind.RECURRING_BOUNDED_BELOW, level=floor)
    return DipVerdict(DipKind.NO_DIP)


# ----------------------------------------------------------------------
# Gram matrices
# ----------------------------------------------------------------------
def gram(vectors: Sequence[Vector]) -> HermMatrix:
    """G[i, j] = <v_i, v_j>."""
    space = space_of(vectors[0])
    size = len(vectors)
    data = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(i, size):
            data[i, j] = inner(space, vectors[i], vectors[j])
            data[j, i] = np.conj(data[i, j])
    return HermMatrix.from_array(data)


def accepted_prefix(vectors: Sequence[Vector], limit: Optional[int] = None) -> List[int]:
    """Indices kept while the Gram matrix of the kept vectors stays positive definite."""
    kept: List[int] = []
    for index, vector in enumerate(vectors):
        if limit is not None and len(kept) >= limit:
            break
        trial = [vectors[i] for i in kept] + [vector]
        try:
            cholesky(gram(trial))
        except NotPositiveDefinite as exc:
            logger.warning("generator %d dropped: %s", index, exc)
            continue
        kept.append(index)
    return kept


def restricted_gram(op: Operator, basis: Sequence[Vector], n: int) -> HermMatrix:
    """G_n of the basis, pruning trailing vectors until G_0 is positive definite."""
    kept = list(basis)
    while True:
        try:
            cholesky(gram(kept))
            break
        except NotPositiveDefinite as exc:
            kept.pop()
            logger.warning("pruned a generator from the restricted basis: %s", exc)
            if len(kept) < 2:
                raise DegenerateBasis(f"only {len(kept)} generator(s) left after pruning", kept=len(kept)) from exc
    return gram([iterate(op, n, v) for v in kept])


# ----------------------------------------------------------------------
# Filtrations
# ----------------------------------------------------------------------
def level_horizon(horizon: int, m: int) -> int:
    """N(m) = min(N * 2^ceil(m/4), 2^16)."""
    return min(horizon * 2 ** math.ceil(m / 4), MAX_HORIZON)


@dataclass
class FiltrationLevel:
    level: int
    horizon: int
    peak: float
    floor: float
    peak_time: int
    floor_time: int
    accepted: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "horizon": self.horizon,
            "peak": self.peak,
            "floor": self.floor,
            "peak_time": self.peak_time,
            "floor_time": self.floor_time,
            "accepted": list(self.accepted),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "FiltrationLevel":
        return cls(
            level=int(payload["level"]),
            horizon=int(payload["horizon"]),
            peak=float(payload["peak"]),
            floor=float(payload["floor"]),
            peak_time=int(payload["peak_time"]),
            floor_time=int(payload["floor_time"]),
            accepted=tuple(int(i) for i in payload["accepted"]),
        )


@dataclass
class FiltrationReport:
    levels: List[FiltrationLevel]

    @property
    def accepted(self) -> Tuple[int, ...]:
        return self.levels[-1].accepted if self.levels else ()

    def peaks(self) -> np.ndarray:
        return np.array([level.peak for level in self.levels])

    def floors(self) -> np.ndarray:
        return np.array([level.floor for level in self.levels])

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "level": lv.level,
                "horizon": lv.horizon,
                "peak": lv.peak,
                "floor": lv.floor,
                "accepted": " ".join(str(i) for i in lv.accepted),
            }
            for lv in self.levels
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"levels": [level.to_dict() for level in self.levels]}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "FiltrationReport":
        return cls([FiltrationLevel.from_dict(item) for item in payload.get("levels", [])])


def _images(op: Operator, vectors: Sequence[Vector], n: int) -> Tuple[List[Vector], int]:
    """T^n of each vector; the second value is the first index that overflowed (or len)."""
    images = []
    for index, vector in enumerate(vectors):
        try:
            image = iterate(op, n, vector)
        except Overflow:
            return images, index
        if norm(image) > GRAM_NORM_LIMIT:
            return images, index
        images.append(image)
    return images, len(vectors)


def filtration(op: Operator, vectors: Sequence[Vector], levels: int, horizon: int) -> FiltrationReport:
    """Peak and floor of ||T^n|_{V_m}|| for m = 1..levels over n <= N(m)."""
    accepted = accepted_prefix(vectors, levels)
    if not accepted:
        raise DegenerateBasis("no generator survived the positive-definiteness check", kept=0)
    basis = [vectors[i] for i in accepted]
    count = len(basis)
    horizons = [level_horizon(horizon, m) for m in range(1, count + 1)]
    g0 = gram(basis).entries
    peak = np.zeros(count)
    floor = np.full(count, np.inf)
    peak_time = np.zeros(count, dtype=int)
    floor_time = np.zeros(count, dtype=int)

    for n in sample_times(max(horizons)):
        images, overflow_at = _images(op, basis, int(n))
        gn = gram(images).entries if images else None
        for m in range(1, count + 1):
            if n > horizons[m - 1]:
                continue
            if m > overflow_at:
                if np.isfinite(peak[m - 1]):
                    peak[m - 1], peak_time[m - 1] = np.inf, n
                continue
            pairs = gen_eigh(HermMatrix.from_array(gn[:m, :m]), HermMatrix.from_array(g0[:m, :m]))
            top = math.sqrt(max(float(pairs.values[-1]), 0.0))
            bottom = math.sqrt(max(float(pairs.values[0]), 0.0))
            if top > peak[m - 1]:
                peak[m - 1], peak_time[m - 1] = top, n
            if bottom < floor[m - 1]:
                floor[m - 1], floor_time[m - 1] = bottom, n
        logger.debug("filtration n = %d done (%d of %d generators finite)", n, overflow_at, count)

    report = FiltrationReport(
        [
            FiltrationLevel(
                level=m,
                horizon=horizons[m - 1],
                peak=float(peak[m - 1]),
                floor=float(floor[m - 1]),
                peak_time=int(peak_time[m - 1]),
                floor_time=int(floor_time[m - 1]),
                accepted=tuple(accepted[:m]),
            )
            for m in range(1, count + 1)
        ]
    )
    return report


def pair_stats(op: Operator, x: Vector, y: Vector, horizon: int) -> Tuple[float, float]:
    """(max, min) of ||T^n (x - y)|| over sampled n in [N/2, N]."""
    difference = subtract(x, y)
    if norm(difference) == 0.0:
        raise ContractViolation("pair statistics need distinct points")
    rec = orbit_of_sequence(lambda n: norm(iterate(op, n, difference)), horizon)
    late = rec.norms[rec.times >= horizon / 2.0]
    return float(np.max(late)), float(np.min(late))

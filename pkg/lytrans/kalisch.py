"""Calculus for the Kalisch operator S on L^2[0, 2pi].

    S f(theta) = e^{i theta} f(theta) - int_0^theta i e^{it} f(t) dt

Every indicator 1_[alpha, 2pi] is an eigenfunction with eigenvalue e^{i alpha}, so
step functions written as sums of jumps d_j 1_[t_j, 2pi] are mapped exactly:
(w + cS)^n f = sum_j d_j (w + c e^{i t_j})^n 1_[t_j, 2pi] for every integer n
where the bases are nonzero. Sampled functions go through the closed-form
iterate with a high-order cumulative quadrature.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    CLAIM_HORIZON,
    CLAIM_PIECES,
    DEFAULT_PANELS,
    DEFAULT_TRIALS,
    DIVERGENCE_THRESHOLD,
    EXACT_TOL,
    GROWTH_FLOOR,
    LOG_OVERFLOW,
    MAX_SAMPLED_POWER,
    MIN_PANELS,
    TANGENT_TOL,
    TWO_PI,
)
from .exceptions import ContractViolation, HorizonTooSmall, OutOfRange, Overflow, ZeroTranslation
from .numkit import check_finite, cumulative_quadrature, trapezoid
from .schema import ClaimOutcome, ClaimReport, TnReport

logger = logging.getLogger(__name__)


def reduce_angle(theta: float) -> float:
    """Representative of theta in [0, 2pi)."""
    value = math.fmod(theta, TWO_PI)
    if value < 0.0:
        value += TWO_PI
    return 0.0 if value >= TWO_PI else value


# ----------------------------------------------------------------------
# Representations
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant function; values[j] holds on [breakpoints[j], breakpoints[j+1])."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        points = np.array(self.breakpoints, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=complex).reshape(-1)
        if points.size == 0 or points.size != values.size:
            raise ContractViolation("step function needs one value per breakpoint")
        if points[0] != 0.0 or points[-1] >= TWO_PI or np.any(np.diff(points) <= 0.0):
            raise ContractViolation("breakpoints must ascend strictly from 0 and stay below 2pi")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
            raise ContractViolation("step function data must be finite")
        points.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "breakpoints", points)
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.zeros(1), np.zeros(1, dtype=complex))

    @classmethod
    def constant(cls, value: complex = 1.0) -> "StepFunction":
        return cls(np.zeros(1), np.array([value], dtype=complex))

    @classmethod
    def indicator(cls, alpha: float, value: complex = 1.0) -> "StepFunction":
        """value * 1_[alpha, 2pi]."""
        if not 0.0 <= alpha <= TWO_PI:
            raise ContractViolation(f"alpha must lie in [0, 2pi], got {alpha}")
        if alpha == 0.0:
            return cls.constant(value)
        if alpha >= TWO_PI:
            return cls.zero()
        return cls(np.array([0.0, alpha]), np.array([0.0, value], dtype=complex))

    @classmethod
    def interval(cls, lo: float, hi: float, value: complex = 1.0) -> "StepFunction":
        """value * 1_[lo, hi)."""
        return cls.indicator(lo, value) - cls.indicator(hi, value)

    @classmethod
    def from_jumps(cls, points: Sequence[float], jumps: Sequence[complex]) -> "StepFunction":
        """Build sum_j jumps[j] * 1_[points[j], 2pi]; points may repeat or skip 0."""
        points = np.asarray(points, dtype=float)
        jumps = np.asarray(jumps, dtype=complex)
        unique, inverse = np.unique(points, return_inverse=True)
        merged = np.zeros(unique.size, dtype=complex)
        np.add.at(merged, inverse, jumps)
        keep = unique < TWO_PI
        unique, merged = unique[keep], merged[keep]
        if unique.size == 0 or unique[0] != 0.0:
            unique = np.concatenate(([0.0], unique))
            merged = np.concatenate(([0.0], merged))
        return cls(unique, np.cumsum(merged))

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------
    def lengths(self) -> np.ndarray:
        return np.diff(np.append(self.breakpoints, TWO_PI))

    def jumps(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.breakpoints, np.diff(self.values, prepend=0.0)

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        index = np.searchsorted(self.breakpoints, theta, side="right") - 1
        return self.values[np.clip(index, 0, self.values.size - 1)]

    def refine(self, points: Iterable[float]) -> "StepFunction":
        """Same function with extra breakpoints inserted."""
        extra = np.asarray([p for p in points if 0.0 < p < TWO_PI], dtype=float)
        merged = np.union1d(self.breakpoints, extra)
        return StepFunction(merged, self.evaluate(merged))

    def simplify(self) -> "StepFunction":
        """Drop breakpoints that separate equal values."""
        keep = np.ones(self.values.size, dtype=bool)
        keep[1:] = self.values[1:] != self.values[:-1]
        return StepFunction(self.breakpoints[keep], self.values[keep])

    def sample(self, panels: int = DEFAULT_PANELS) -> "SampledFunction":
        return SampledFunction(self.evaluate(SampledFunction.grid(panels)))

    # ------------------------------------------------------------------
    # Hilbert structure and arithmetic
    # ------------------------------------------------------------------
    def _aligned(self, other: "StepFunction") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        points = np.union1d(self.breakpoints, other.breakpoints)
        return points, self.evaluate(points), other.evaluate(points)

    def inner(self, other: "StepFunction") -> complex:
        points, mine, theirs = self._aligned(other)
        lengths = np.diff(np.append(points, TWO_PI))
        return complex(np.sum(mine * np.conj(theirs) * lengths))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * self.lengths())))

    def normalized(self) -> "StepFunction":
        size = self.norm()
        if size == 0.0:
            raise ContractViolation("cannot normalise the zero function")
        return self * (1.0 / size)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        points, mine, theirs = self._aligned(other)
        return StepFunction(points, mine + theirs)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        points, mine, theirs = self._aligned(other)
        return StepFunction(points, mine - theirs)

    def __mul__(self, scalar: complex) -> "StepFunction":
        return StepFunction(self.breakpoints, self.values * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return self * -1.0


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples at theta_j = 2pi j / N, j = 0..N."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=complex).reshape(-1)
        panels = samples.size - 1
        if panels < MIN_PANELS or panels & (panels - 1):
            raise ContractViolation(f"panel count must be a power of two >= {MIN_PANELS}, got {panels}")
        if not np.all(np.isfinite(samples)):
            raise ContractViolation("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @staticmethod
    def grid(panels: int) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, panels + 1)

    @classmethod
    def from_callable(cls, func, panels: int = DEFAULT_PANELS) -> "SampledFunction":
        return cls(func(cls.grid(panels)))

    @property
    def panels(self) -> int:
        return self.samples.size - 1

    @property
    def step(self) -> float:
        return TWO_PI / self.panels

    @property
    def theta(self) -> np.ndarray:
        return self.grid(self.panels)

    def _check(self, other: "SampledFunction") -> None:
        if other.panels != self.panels:
            raise ContractViolation(f"panel mismatch: {self.panels} vs {other.panels}")

    def inner(self, other: "SampledFunction") -> complex:
        self._check(other)
        return trapezoid(self.samples * np.conj(other.samples), self.step)

    def norm(self) -> float:
        return math.sqrt(max(trapezoid(np.abs(self.samples) ** 2, self.step).real, 0.0))

    def normalized(self) -> "SampledFunction":
        size = self.norm()
        if size == 0.0:
            raise ContractViolation("cannot normalise the zero function")
        return self * (1.0 / size)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        self._check(other)
        return SampledFunction(self.samples + other.samples)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        self._check(other)
        return SampledFunction(self.samples - other.samples)

    def __mul__(self, scalar: complex) -> "SampledFunction":
        return SampledFunction(self.samples * complex(scalar))

    __rmul__ = __mul__


# ----------------------------------------------------------------------
# Operator action
# ----------------------------------------------------------------------
def kalisch_apply(f):
    """S f, exact for step functions and quadrature-based for samples."""
    if isinstance(f, StepFunction):
        points, jumps = f.jumps()
        return StepFunction.from_jumps(points, jumps * np.exp(1j * points))
    if isinstance(f, SampledFunction):
        rotor = np.exp(1j * f.theta)
        integral = cumulative_quadrature(1j * rotor * f.samples, f.step)
        return SampledFunction(rotor * f.samples - integral)
    raise ContractViolation(f"kalisch_apply expects a function vector, got {type(f).__name__}")


def _step_power(f: StepFunction, w: complex, n: int, factor: complex) -> StepFunction:
    points, jumps = f.jumps()
    bases = w + factor * np.exp(1j * points)
    live = jumps != 0.0
    if n < 0 and np.any(np.abs(bases[live]) == 0.0):
        raise ContractViolation("w + cS is not invertible on this step function")
    if np.any(live):
        with np.errstate(divide="ignore"):
            growth = n * np.log(np.abs(bases[live])) + np.log(np.abs(jumps[live]))
        if np.max(growth) > LOG_OVERFLOW:
            raise Overflow(f"(w + cS)^{n} exceeds the representable range", step=n)
    powers = np.ones_like(bases)
    powers[live] = bases[live] ** n
    return StepFunction.from_jumps(points, jumps * powers)


def _sampled_power(f: SampledFunction, w: complex, n: int, factor: complex) -> SampledFunction:
    if n < 0:
        raise ContractViolation("negative powers are only available for step functions")
    if n > MAX_SAMPLED_POWER:
        raise ContractViolation(f"sampled iterates are limited to n <= {MAX_SAMPLED_POWER}")
    if n == 0:
        return f
    shift = w / factor
    rotor = np.exp(1j * f.theta)
    base = shift + rotor
    peak = float(np.max(np.abs(base)))
    if peak > 0.0 and n * math.log(peak * abs(factor)) + math.log(max(n, 1) * TWO_PI) > LOG_OVERFLOW:
        raise Overflow(f"(w + cS)^{n} exceeds the representable range", step=n)
    integral = cumulative_quadrature(1j * rotor * base ** (n - 1) * f.samples, f.step)
    return SampledFunction(factor**n * (base**n * f.samples - n * integral))


def kalisch_iterate(w: complex, n: int, f, *, factor: complex = 1.0):
    """(w + factor * S)^n f in a single pass (closed form, no step-by-step error)."""
    w = check_finite(w, name="w")
    factor = check_finite(factor, name="factor")
    if factor == 0.0:
        raise ContractViolation("factor must be nonzero")
    if isinstance(f, StepFunction):
        return _step_power(f, w, int(n), factor)
    if isinstance(f, SampledFunction):
        return _sampled_power(f, w, int(n), factor)
    raise ContractViolation(f"kalisch_iterate expects a function vector, got {type(f).__name__}")


def step_orbit_norms(
    f: StepFunction,
    w: complex,
    horizon: int,
    *,
    factor: complex = 1.0,
    region: Optional["Region"] = None,
) -> np.ndarray:
    """||P (w + cS)^n f|| for n = 0..horizon, +inf once the range is exceeded.

    P is the projection onto ``region`` when given.
    """
    g = f if region is None else f.refine(region.endpoints())
    points, jumps = g.jumps()
    bases = w + factor * np.exp(1j * points)
    weights = g.lengths()
    if region is not None:
        weights = weights * region.contains(points)
    norms = np.full(horizon + 1, np.inf)
    live = jumps != 0.0
    if not np.any(live):
        norms[:] = 0.0
        return norms
    with np.errstate(divide="ignore"):
        growth = float(np.max(np.log(np.abs(bases[live]))))
    cap = horizon
    if growth > 0.0:
        headroom = LOG_OVERFLOW - float(np.max(np.log(np.abs(jumps[live])))) - 1.0
        cap = min(horizon, max(int(headroom / growth), 0))
    powers = np.arange(cap + 1)
    # zero jumps stay exactly zero: their bases may lie far outside the cap
    coefficients = np.zeros((cap + 1, jumps.size), dtype=complex)
    coefficients[:, live] = jumps[live][None, :] * bases[live][None, :] ** powers[:, None]
    values = np.cumsum(coefficients, axis=1)
    kept = weights > 0.0
    norms[: cap + 1] = np.sqrt(np.sum(np.abs(values[:, kept]) ** 2 * weights[kept][None, :], axis=1))
    return norms


# ----------------------------------------------------------------------
# Circle geometry and claim constants
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CirclePosition:
    d: float
    xi0: float
    intersections: Tuple[float, ...]
    one_plus_w: str

    @property
    def kind(self) -> str:
        return {0: "none", 1: "tangent", 2: "pair"}[len(self.intersections)]

    @property
    def wraps(self) -> bool:
        """True when the arc where |w + e^{i theta}| <= 1 contains theta = 0."""
        return self.one_plus_w == "inside"


def circle_position(w: complex) -> CirclePosition:
    """How the spectrum circle {w + e^{i theta}} meets the unit circle."""
    w = check_finite(w, name="w")
    d = abs(w)
    if d == 0.0:
        raise ZeroTranslation("w = 0: the spectrum of w + S is the unit circle itself")
    xi0 = reduce_angle(math.atan2(w.imag, w.real))
    gap = abs(1.0 + w) - 1.0
    location = "on" if abs(gap) <= EXACT_TOL else ("inside" if gap < 0.0 else "outside")
    if abs(d - 2.0) <= TANGENT_TOL:
        return CirclePosition(d, xi0, (reduce_angle(xi0 + math.pi),), location)
    if d > 2.0:
        return CirclePosition(d, xi0, (), location)
    half = math.acos(-d / 2.0)
    pair = sorted((reduce_angle(xi0 + half), reduce_angle(xi0 + TWO_PI - half)))
    return CirclePosition(d, xi0, (pair[0], pair[1]), location)


@dataclass(frozen=True)
class Claim2Constants:
    a: float
    b: float
    a0: float
    b0: float
    d: float
    xi0: float
    q: float
    bconst: float
    m: float

    def rotated(self) -> Tuple[float, float, float, float]:
        """Offsets of a < a0 < b0 < b measured from xi0, each in (0, 2pi)."""
        return tuple(reduce_angle(angle - self.xi0) for angle in (self.a, self.a0, self.b0, self.b))

    @property
    def inner_arc(self) -> Tuple[float, float]:
        """(start, length) of the arc [a0, b0] where |w + e^{i theta}| <= q."""
        start = reduce_angle(self.a0)
        return start, reduce_angle(self.b0 - self.a0)

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "a0": self.a0,
            "b0": self.b0,
            "d": self.d,
            "xi0": self.xi0,
            "q": self.q,
            "B": self.bconst,
            "M": self.m,
        }


def peak_power_factor(q: float) -> float:
    """max over integers n >= 1 of n q^(n-1)."""
    if not 0.0 < q < 1.0:
        raise ContractViolation(f"decay base must lie in (0, 1), got {q}")
    top = int(math.ceil(-1.0 / math.log(q))) + 2
    n = np.arange(1, top + 1)
    return float(np.max(n * q ** (n - 1.0)))


def claim2_constants(w: complex) -> Claim2Constants:
    position = circle_position(w)
    if position.kind != "pair":
        raise OutOfRange(f"|w| = {position.d:.6g}: the bound needs two intersections (0 < |w| < 2)")
    d, xi0 = position.d, position.xi0
    half = math.acos(-d / 2.0)
    inner = math.acos(-(d + 1.0) / 3.0)
    q = math.sqrt(((d - 1.0) ** 2 + 2.0) / 3.0)
    bconst = (TWO_PI - 2.0 * inner) * peak_power_factor(q)
    m = 1.0 + math.sqrt(TWO_PI) * (bconst + 6.0 / (d * math.sqrt(9.0 - (d + 1.0) ** 2)))
    return Claim2Constants(
        a=reduce_angle(xi0 + half),
        b=reduce_angle(xi0 + TWO_PI - half),
        a0=reduce_angle(xi0 + inner),
        b0=reduce_angle(xi0 + TWO_PI - inner),
        d=d,
        xi0=xi0,
        q=q,
        bconst=bconst,
        m=m,
    )


# ----------------------------------------------------------------------
# Regions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Region:
    """Union of half-open intervals [lo, hi) in [0, 2pi]; hi = 2pi is closed."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        for lo, hi in self.intervals:
            if not 0.0 <= lo <= hi <= TWO_PI:
                raise ContractViolation(f"region interval [{lo}, {hi}) leaves [0, 2pi]")

    @classmethod
    def h0(cls, s: float) -> "Region":
        return cls(((0.0, s),))

    @classmethod
    def h1(cls, a: float) -> "Region":
        return cls(((0.0, a),))

    @classmethod
    def h2(cls, a: float, b: float) -> "Region":
        return cls(((a, b),))

    @classmethod
    def h3(cls, b: float) -> "Region":
        return cls(((b, TWO_PI),))

    @classmethod
    def h4(cls, b: float, delta: float) -> "Region":
        """[b, b + delta), the strip just past the boundary angle."""
        return cls(((b, min(b + delta, TWO_PI)),))

    @classmethod
    def arc(cls, start: float, length: float) -> "Region":
        """Counter-clockwise arc from start, split at 2pi when it wraps."""
        start = reduce_angle(start)
        end = start + length
        if end <= TWO_PI:
            return cls(((start, end),))
        return cls(((start, TWO_PI), (0.0, end - TWO_PI)))

    def endpoints(self) -> List[float]:
        return [point for interval in self.intervals for point in interval]

    def contains(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        mask = np.zeros(theta.shape, dtype=bool)
        for lo, hi in self.intervals:
            upper = theta <= hi if hi >= TWO_PI else theta < hi
            mask |= (theta >= lo) & upper
        return mask


def project_region(f, region: Region):
    """Multiply f by the indicator of region (orthogonal projection)."""
    if isinstance(f, StepFunction):
        g = f.refine(region.endpoints())
        return StepFunction(g.breakpoints, g.values * region.contains(g.breakpoints))
    if isinstance(f, SampledFunction):
        return SampledFunction(f.samples * region.contains(f.theta))
    raise ContractViolation(f"project_region expects a function vector, got {type(f).__name__}")


# ----------------------------------------------------------------------
# Claim certificates
# ----------------------------------------------------------------------
def _random_step(rng: np.random.Generator, start: float, length: float, pieces: int) -> StepFunction:
    """Random step function supported on the arc [start, start + length].

    Every claim draws its test functions from a sub-arc of the region it
    speaks about. For the uniform bound that sub-arc is [a0, b0], where
    |w + e^{i theta}| <= q < 1: the bound M does not hold for arbitrary f
    supported on the whole of [a, b].
    """
    offsets = np.unique(rng.uniform(0.0, length, size=pieces + 1))
    values = rng.normal(size=offsets.size - 1) + 1j * rng.normal(size=offsets.size - 1)
    points = [reduce_angle(start + offset) for offset in offsets]
    jumps = np.diff(np.concatenate(([0.0], values, [0.0])))
    # a wrapped arc crosses 2pi: re-enter the running value at 0
    total = StepFunction.zero()
    running = 0.0 + 0.0j
    for point, jump, previous in zip(points, jumps, [None] + points[:-1]):
        if previous is not None and point < previous:
            total = total + StepFunction.indicator(0.0, running)
        running += jump
        total = total + StepFunction.indicator(point, jump)
    return total.simplify()


def _divergence_witness(ratios: np.ndarray, horizon: int) -> Optional[int]:
    above = np.nonzero(ratios > DIVERGENCE_THRESHOLD)[0]
    if above.size:
        return int(above[0])
    finite = ratios[np.isfinite(ratios)]
    if finite.size >= 2 and finite[-1] < GROWTH_FLOOR and finite[-1] > finite[-2]:
        raise HorizonTooSmall(
            f"orbit still growing at n = {horizon} (ratio {finite[-1]:.3e})",
            horizon=horizon,
            last_norm=float(finite[-1]),
        )
    return None


def _divergence_claim(
    claim: int,
    w: complex,
    horizon: int,
    draws: List[StepFunction],
    region: Optional[Region],
    label: str,
) -> ClaimOutcome:
    witnesses: List[int] = []
    worst = math.inf
    for f in draws:
        ratios = step_orbit_norms(f, w, horizon, region=region) / f.norm()
        witness = _divergence_witness(ratios, horizon)
        if witness is None:
            return ClaimOutcome(
                claim=claim,
                passed=False,
                max_ratio=float(np.max(ratios)),
                trials=len(draws),
                detail=f"{label}: no divergence before n = {horizon}",
            )
        witnesses.append(witness)
        worst = min(worst, float(np.max(ratios[np.isfinite(ratios)])))
    return ClaimOutcome(
        claim=claim,
        passed=True,
        witness_n=max(witnesses),
        max_ratio=worst,
        trials=len(draws),
        detail=f"{label}: every draw exceeded {DIVERGENCE_THRESHOLD:.0e}",
    )


def contracting_arc_claim(
    w: complex,
    horizon: int = CLAIM_HORIZON,
    trials: int = DEFAULT_TRIALS,
    *,
    rng: Optional[np.random.Generator] = None,
    panels: int = DEFAULT_PANELS,
) -> ClaimOutcome:
    """Uniform bound sup_n ||(w + S)^n f|| <= M ||f|| for f on the contracting arc [a0, b0]."""
    constants = claim2_constants(w)
    rng = rng if rng is not None else np.random.default_rng(0)
    start, length = constants.inner_arc
    theta = start + np.linspace(0.0, length, panels + 1)
    sampled_peak = float(np.max(np.abs(w + np.exp(1j * theta))))
    worst = 0.0
    finite = True
    for _ in range(trials):
        f = _random_step(rng, start, length, CLAIM_PIECES)
        ratios = step_orbit_norms(f, w, horizon) / f.norm()
        if not np.all(np.isfinite(ratios)):
            finite = False
            worst = math.inf
            break
        worst = max(worst, float(np.max(ratios)))
    return ClaimOutcome(
        claim=2,
        passed=finite and 0.0 < worst <= constants.m and sampled_peak <= constants.q + EXACT_TOL,
        max_ratio=worst,
        trials=trials,
        detail=f"sup ratio {worst:.4f} vs M = {constants.m:.4f}; max |w+e^(it)| on [a0,b0] = {sampled_peak:.6f}",
    )


def claim_certificates(
    w: complex,
    horizon: int = CLAIM_HORIZON,
    trials: int = DEFAULT_TRIALS,
    *,
    seed: int = 0,
    panels: int = DEFAULT_PANELS,
) -> ClaimReport:
    """Numerical evidence for the three claims behind S_LY(S) = {0} at w."""
    w = check_finite(w, name="w")
    position = circle_position(w)
    if position.kind != "pair" or position.one_plus_w == "on":
        raise OutOfRange(f"claims need two intersections with 1 + w off the unit circle (w = {w})")
    constants = claim2_constants(w)
    rng = np.random.default_rng(seed)
    a, b = position.intersections
    wraps = position.wraps
    logger.info("claims for w = %s: layout %s, M = %.4f", w, "inside" if wraps else "outside", constants.m)

    # Claim 1: the expanding piece that does not reach 2pi diverges under projection.
    if wraps:
        span = b - a
        region1 = Region.h2(a, b)
        draws1 = [_random_step(rng, a + 0.1 * span, 0.8 * span, CLAIM_PIECES) for _ in range(trials)]
    else:
        region1 = Region.h1(a)
        draws1 = [_random_step(rng, 0.0, 0.9 * a, CLAIM_PIECES) for _ in range(trials)]
    claim1 = _divergence_claim(1, w, horizon, draws1, region1, "projected orbit")

    # Claim 2: functions on the strictly contracting arc stay below M.
    claim2 = contracting_arc_claim(w, horizon, trials, rng=rng, panels=panels)

    # Claim 3: past the boundary angle only constants keep a bounded orbit.
    tail_start, tail_length = (a, b - a) if wraps else (b, TWO_PI - b)
    eigen = StepFunction.indicator(tail_start, complex(rng.normal(), rng.normal()))
    eigen_norms = step_orbit_norms(eigen, w, horizon)
    modulus = abs(w + np.exp(1j * tail_start))
    expected = eigen.norm() * modulus ** np.arange(horizon + 1)
    drift = float(np.max(np.abs(eigen_norms - expected))) / eigen.norm()
    draws3 = [
        StepFunction.indicator(tail_start, complex(rng.normal(), rng.normal()))
        + _random_step(rng, tail_start + 0.5 * tail_length, 0.4 * tail_length, CLAIM_PIECES)
        for _ in range(trials)
    ]
    claim3 = _divergence_claim(3, w, horizon, draws3, None, "non-constant tail")
    claim3 = claim3.model_copy(
        update={
            "passed": claim3.passed and drift <= 1e-6,
            "detail": f"{claim3.detail}; constant tail drift {drift:.2e}",
        }
    )

    return ClaimReport(
        w=(w.real, w.imag),
        horizon=horizon,
        layout="inside" if wraps else "outside",
        constants=constants.as_dict(),
        claims=[claim1, claim2, claim3],
    )


# ----------------------------------------------------------------------
# Closed-form identity checks
# ----------------------------------------------------------------------
def random_trig_function(rng: np.random.Generator, panels: int, degree: int = 4) -> SampledFunction:
    """Random trigonometric polynomial sampled on the panel grid."""
    modes = np.arange(-degree, degree + 1)
    coefficients = (rng.normal(size=modes.size) + 1j * rng.normal(size=modes.size)) / (1.0 + np.abs(modes))
    theta = SampledFunction.grid(panels)
    return SampledFunction(np.exp(1j * np.outer(theta, modes)) @ coefficients)


def _relative(a: SampledFunction, b: SampledFunction) -> float:
    scale = a.norm()
    return (a - b).norm() / scale if scale > 0.0 else (a - b).norm()


def verify_tn(
    w: complex,
    max_power: int = 50,
    *,
    trials: int = DEFAULT_TRIALS,
    panels: int = DEFAULT_PANELS,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> TnReport:
    """Compare the closed-form iterate with repeated application and the induction step."""
    w = check_finite(w, name="w")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = random_trig_function(rng, panels)
        stepped = f
        for n in range(1, max_power + 1):
            previous = stepped
            stepped = previous * w + kalisch_apply(previous)
            closed = kalisch_iterate(w, n, f)
            worst = max(worst, _relative(closed, stepped))
            if n > 1:
                induction = kalisch_iterate(w, n - 1, f * w + kalisch_apply(f))
                worst = max(worst, _relative(closed, induction))
    logger.info("closed-form check for w = %s: max relative error %.3e", w, worst)
    return TnReport(
        w=(w.real, w.imag),
        max_power=max_power,
        panels=panels,
        trials=trials,
        max_relative_error=worst,
        tolerance=tolerance,
    )

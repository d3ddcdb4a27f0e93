"""Three-valued Li-Yorke classification of a single operator.

Analytic filters decide whatever the spectral and structural data settle
exactly. The empirical strategies only ever look for certificates:

* decay-span (S1): generators whose orbits recur to zero, then restricted-norm
  growth over the filtration of their span;
* eigenframe alignment (S2): unimodular Kalisch multiples, where a single step
  function is found whose orbit peaks and later dips deeper at every level of a
  nested eigenframe;
* inverse-orbit interleave (S3): invertible operators, peak then dip then peak.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .constants import (
    BOUNDED_PEAK,
    DEEPENING_RUN,
    EXACT_TOL,
    FRAME_LATTICE,
    FRAME_MIN_LEVEL,
    MODEL_TOL,
    PEAK_THRESHOLD,
    REPLAY_TOL,
)
from .dynamics import (
    DipKind,
    FiltrationReport,
    dip_classify,
    filtration,
    gram,
    orbit,
)
from .exceptions import ContractViolation, EmptyRegion, NumericalError, UnsupportedStrategy
from .kalisch import StepFunction, kalisch_iterate, step_orbit_norms
from .numkit import gen_eigh
from .operators import (
    BackwardShift,
    Diagonal,
    DirectSum,
    ForwardShift,
    Kalisch,
    KernelVector,
    Operator,
    SeqVector,
    Strategy,
    SumVector,
    combine,
    generators,
    iterate,
    norm,
    normal_form,
    translate,
)
from .schema import Budget

logger = logging.getLogger(__name__)


class VerdictValue(str, Enum):
    CHAOTIC = "C"
    NOT_CHAOTIC = "N"
    UNDETERMINED = "U"


# ----------------------------------------------------------------------
# Vector encoding for certificates
# ----------------------------------------------------------------------
def _pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex)]


def _complex(values: List[List[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in values], dtype=complex)


def encode_vector(x: Any) -> Dict[str, Any]:
    if isinstance(x, SeqVector):
        return {"type": "sequence", "coefficients": _pairs(x.coefficients)}
    if isinstance(x, KernelVector):
        return {"type": "kernel", "ratio": _pairs([x.ratio])[0], "coefficient": _pairs([x.coefficient])[0]}
    if isinstance(x, StepFunction):
        return {"type": "step", "breakpoints": [float(t) for t in x.breakpoints], "values": _pairs(x.values)}
    if isinstance(x, SumVector):
        return {"type": "sum", "parts": [encode_vector(part) for part in x.parts]}
    raise ContractViolation(f"cannot encode {type(x).__name__} in a certificate")


def decode_vector(payload: Dict[str, Any]) -> Any:
    kind = payload.get("type")
    if kind == "sequence":
        return SeqVector(_complex(payload["coefficients"]))
    if kind == "kernel":
        return KernelVector(complex(*payload["ratio"]), complex(*payload["coefficient"]))
    if kind == "step":
        return StepFunction(np.array(payload["breakpoints"]), _complex(payload["values"]))
    if kind == "sum":
        return SumVector(tuple(decode_vector(part) for part in payload["parts"]))
    raise ContractViolation(f"unknown vector type '{kind}'")


# ----------------------------------------------------------------------
# Certificates and verdicts
# ----------------------------------------------------------------------
@dataclass
class AnalyticFilter:
    name: str
    detail: str = ""
    kind: str = field(default="AnalyticFilter", init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "name": self.name, "detail": self.detail}


@dataclass
class CriterionCertificate:
    x0: Tuple[int, ...]
    strategies: Tuple[str, ...]
    report: FiltrationReport
    dips: Tuple[str, ...]
    kind: str = field(default="CriterionCertificate", init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "x0": list(self.x0),
            "strategies": list(self.strategies),
            "dips": list(self.dips),
            "report": self.report.to_dict(),
        }


@dataclass
class InterleaveCertificate:
    strategy: str
    vector: Dict[str, Any]
    times: Tuple[int, ...]
    norms: Tuple[float, ...]
    level: Optional[int] = None
    kind: str = field(default="InterleaveCertificate", init=False)

    @property
    def peak_time(self) -> int:
        return self.times[0]

    @property
    def dip_time(self) -> int:
        return self.times[1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "strategy": self.strategy,
            "vector": self.vector,
            "times": list(self.times),
            "norms": list(self.norms),
            "level": self.level,
        }


@dataclass
class BoundedBelowEvidence:
    floor: float
    peak_bound: float
    kind: str = field(default="BoundedBelowEvidence", init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "floor": self.floor, "peak_bound": self.peak_bound}


@dataclass
class SearchExhausted:
    budget: Dict[str, Any]
    strategies: Tuple[str, ...] = ()
    kind: str = field(default="SearchExhausted", init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "budget": self.budget, "strategies": list(self.strategies)}


Certificate = Union[AnalyticFilter, CriterionCertificate, InterleaveCertificate, BoundedBelowEvidence, SearchExhausted]


def certificate_from_dict(payload: Dict[str, Any]) -> Certificate:
    kind = payload.get("kind")
    if kind == "AnalyticFilter":
        return AnalyticFilter(payload["name"], payload.get("detail", ""))
    if kind == "CriterionCertificate":
        return CriterionCertificate(
            x0=tuple(payload["x0"]),
            strategies=tuple(payload["strategies"]),
            report=FiltrationReport.from_dict(payload["report"]),
            dips=tuple(payload.get("dips", [])),
        )
    if kind == "InterleaveCertificate":
        return InterleaveCertificate(
            strategy=payload["strategy"],
            vector=payload["vector"],
            times=tuple(int(t) for t in payload["times"]),
            norms=tuple(float(v) for v in payload["norms"]),
            level=payload.get("level"),
        )
    if kind == "BoundedBelowEvidence":
        return BoundedBelowEvidence(float(payload["floor"]), float(payload["peak_bound"]))
    if kind == "SearchExhausted":
        return SearchExhausted(payload.get("budget", {}), tuple(payload.get("strategies", [])))
    raise ContractViolation(f"unknown certificate kind '{kind}'")


@dataclass
class Verdict:
    value: VerdictValue
    certificate: Certificate

    def __post_init__(self) -> None:
        self.value = VerdictValue(self.value)
        if self.value == VerdictValue.UNDETERMINED and not isinstance(self.certificate, SearchExhausted):
            raise ContractViolation("Undetermined verdicts carry a SearchExhausted certificate")

    @property
    def code(self) -> str:
        return self.value.value

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.code, "certificate": self.certificate.to_dict()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Verdict":
        return cls(VerdictValue(payload["value"]), certificate_from_dict(payload["certificate"]))


def _chaotic(certificate: Certificate) -> Verdict:
    return Verdict(VerdictValue.CHAOTIC, certificate)


def _not_chaotic(certificate: Certificate) -> Verdict:
    return Verdict(VerdictValue.NOT_CHAOTIC, certificate)


# ----------------------------------------------------------------------
# Analytic filters
# ----------------------------------------------------------------------
def _filter_part(op: Operator) -> Optional[Verdict]:
    flags = op.flags
    base, _, shift = normal_form(op)
    if flags.normal:
        return _not_chaotic(AnalyticFilter("Normal", "normal operators are never Li-Yorke chaotic"))
    if not op.spectrum.meets_unit_circle(MODEL_TOL):
        return _not_chaotic(AnalyticFilter("SpectrumOffCircle", "spectrum misses the unit circle"))
    if base.flags.compact and abs(abs(shift) - 1.0) > MODEL_TOL:
        return _not_chaotic(AnalyticFilter("CompactTranslate", f"compact base, |lambda| = {abs(shift):.6g} != 1"))
    disk = flags.cowen_douglas
    if disk is not None and disk.meets_unit_circle():
        return _chaotic(AnalyticFilter("CowenDouglas", f"eigenvalue disk {disk.describe()} crosses the unit circle"))
    disk = flags.adjoint_cowen_douglas
    if disk is not None and disk.leaves_closed_unit_disk():
        return _not_chaotic(AnalyticFilter("AdjointCowenDouglas", f"adjoint eigenvalue disk {disk.describe()}"))
    if isinstance(base, ForwardShift) and abs(shift) >= 1.0:
        return _not_chaotic(AnalyticFilter("ForwardLowerBound", "first nonzero coordinate grows like |lambda|^n"))
    if isinstance(base, ForwardShift) and base.weights.tends_to_zero and shift == 0:
        return _not_chaotic(AnalyticFilter("ForwardNilpotentOrbits", "every orbit tends to zero"))
    if isinstance(base, BackwardShift) and abs(abs(shift) - 1.0) <= EXACT_TOL:
        return _chaotic(AnalyticFilter("Salas", "unimodular translate of a backward weighted shift is mixing"))
    if flags.isometry:
        return _not_chaotic(AnalyticFilter("Isometry", "orbit norms are constant"))
    if flags.norm_bound <= 1.0:
        return _not_chaotic(AnalyticFilter("Contraction", f"||T|| <= {flags.norm_bound:.6g}: orbits are bounded"))
    if flags.lower_bound >= 1.0:
        return _not_chaotic(AnalyticFilter("Expansive", f"||Tx|| >= {flags.lower_bound:.6g} ||x||"))
    return None


def analytic_filters(op: Operator) -> Optional[Verdict]:
    """First matching exact rule, or None."""
    if not isinstance(op, DirectSum):
        return _filter_part(op)
    results = [analytic_filters(part) for part in op.parts]
    for index, result in enumerate(results):
        if result is not None and result.value == VerdictValue.CHAOTIC:
            return _chaotic(AnalyticFilter("DirectSum", f"part {index}: {result.certificate.name}"))
    if all(result is not None and result.value == VerdictValue.NOT_CHAOTIC for result in results):
        names = ", ".join(result.certificate.name for result in results)
        return _not_chaotic(AnalyticFilter("DirectSum", f"every part: {names}"))
    return None


# ----------------------------------------------------------------------
# Oracle
# ----------------------------------------------------------------------
def _oracle(op: Operator) -> Optional[bool]:
    if isinstance(op, DirectSum):
        answers = [_oracle(part) for part in op.parts]
        if any(answer is True for answer in answers):
            return True
        if any(answer is None for answer in answers):
            return None
        return False
    base, factor, shift = normal_form(op)
    if isinstance(base, Diagonal):
        return False
    if isinstance(base, ForwardShift):
        return None if base.weights.kind == "list" else False
    if isinstance(base, BackwardShift):
        rule = base.weights
        if rule.kind == "list":
            return None
        if rule.tends_to_zero:
            return abs(abs(shift) - 1.0) <= EXACT_TOL
        return abs(abs(shift) - 1.0) < rule.limit_modulus
    if isinstance(base, Kalisch):
        if abs(abs(factor) - 1.0) <= EXACT_TOL:
            return abs(shift) <= EXACT_TOL
        return None
    return None


def oracle_membership(op: Operator, lam: complex) -> Optional[bool]:
    """Closed-form answer to 'is lam + op Li-Yorke chaotic?', None when unknown."""
    return _oracle(translate(op, lam))


# ----------------------------------------------------------------------
# S1: decay-span
# ----------------------------------------------------------------------
@dataclass
class DecaySpanOutcome:
    verdict: Optional[Verdict] = None
    report: Optional[FiltrationReport] = None
    outside_floor: float = math.inf
    eigen_applicable: bool = False
    ran: bool = False


def _eigen_applicable(op: Operator) -> bool:
    """True when some summand is a backward shift with eigenvectors."""
    if isinstance(op, DirectSum):
        return any(_eigen_applicable(part) for part in op.parts)
    base = normal_form(op).base
    return isinstance(base, BackwardShift) and base.weights.limit_modulus > 0.0


def _increasing(values: np.ndarray) -> bool:
    return all(b > a or b == math.inf for a, b in zip(values[:-1], values[1:]))


def decay_span(op: Operator, budget: Budget) -> DecaySpanOutcome:
    outcome = DecaySpanOutcome(eigen_applicable=_eigen_applicable(op))
    vectors: List[Any] = []
    labels: List[str] = []
    for strategy in (Strategy.BASIS, Strategy.EIGEN_INSIDE):
        try:
            family = generators(op, strategy, budget.levels)
        except (UnsupportedStrategy, EmptyRegion) as exc:
            logger.debug("S1 skipped %s: %s", strategy.value, exc)
            continue
        vectors.extend(family.vectors)
        labels.extend(f"{strategy.value}[{i}]" for i in range(len(family.vectors)))
    if not vectors:
        return outcome
    outcome.ran = True

    dips = []
    x0: List[int] = []
    for index, vector in enumerate(vectors):
        record = orbit(op, vector, budget.horizon)
        verdict = dip_classify(record, budget.dip_epsilon)
        dips.append(verdict.kind.value)
        if verdict.kind == DipKind.RECURRING_TO_ZERO:
            x0.append(index)
        else:
            outcome.outside_floor = min(outcome.outside_floor, float(np.min(record.norms)))
    logger.info("S1: %d of %d generators recur to zero", len(x0), len(vectors))
    if not x0:
        return outcome

    try:
        report = filtration(op, [vectors[i] for i in x0], budget.levels, budget.horizon)
    except NumericalError as exc:
        logger.warning("S1 filtration failed: %s", exc)
        return outcome
    outcome.report = report
    peaks = report.peaks()
    if len(x0) >= 2 and peaks.size >= 3 and peaks[-1] >= PEAK_THRESHOLD and _increasing(peaks[-3:]):
        members = tuple(x0[i] for i in report.accepted)
        outcome.verdict = _chaotic(
            CriterionCertificate(
                x0=members,
                strategies=tuple(labels[i] for i in members),
                report=report,
                dips=tuple(dips[i] for i in members),
            )
        )
    return outcome


# ----------------------------------------------------------------------
# S2: eigenframe alignment
# ----------------------------------------------------------------------
def nested_frame(level: int) -> np.ndarray:
    """pi, then pi (1 + 2^-j) for j = 1..level-1; 2^level is a common period."""
    return np.array([math.pi] + [math.pi * (1.0 + 2.0 ** -j) for j in range(1, level)])


@dataclass
class FrameCandidate:
    vector: StepFunction
    theta: float
    epsilon: float
    start: int
    peak: int
    dip: int

    @property
    def score(self) -> float:
        return min(self.theta, 1.0 / self.epsilon) if self.epsilon > 0.0 else self.theta


def _frame_statistics(f: StepFunction, period: int) -> Optional[FrameCandidate]:
    norms = step_orbit_norms(f, 0.0, 2 * period)
    if not np.all(np.isfinite(norms)) or norms[0] == 0.0:
        return None
    peak = int(np.argmax(norms[:period]))
    if peak == 0:
        return None
    dip = peak + 1 + int(np.argmin(norms[peak + 1 : peak + period + 1]))
    if norms[dip] <= 0.0:
        return None
    target = 0.5 * (math.log(norms[peak]) + math.log(norms[dip]))
    with np.errstate(divide="ignore"):
        gaps = np.abs(np.log(norms[:peak]) - target)
    start = int(np.argmin(gaps))
    return FrameCandidate(
        vector=f,
        theta=float(norms[peak] / norms[start]),
        epsilon=float(norms[dip] / norms[start]),
        start=start,
        peak=peak,
        dip=dip,
    )


def _frame_candidates(op: Operator, level: int, carried: Optional[StepFunction]) -> List[StepFunction]:
    alphas = nested_frame(level)
    basis = [StepFunction.indicator(alpha).normalized() for alpha in alphas]
    period = 2**level
    candidates = [StepFunction.indicator(alphas[0]) - StepFunction.indicator(alphas[-1])]
    g0 = gram(basis)
    for k in range(1, FRAME_LATTICE + 1):
        n = k * period // FRAME_LATTICE
        gn = gram([kalisch_iterate(0.0, n, b) for b in basis])
        try:
            pairs = gen_eigh(gn, g0)
        except NumericalError as exc:
            logger.debug("frame level %d, n = %d skipped: %s", level, n, exc)
            continue
        for column in (0, -1):
            coefficients = np.conj(pairs.vectors[:, column])
            f = combine(coefficients, basis)
            if f.norm() > 0.0:
                candidates.append(f)
    if carried is not None:
        candidates.append(carried)
    return candidates


def _deepening_run(history: List[FrameCandidate]) -> bool:
    if len(history) < DEEPENING_RUN + 1:
        return False
    recent = history[-(DEEPENING_RUN + 1) :]
    return all(b.theta > a.theta and b.epsilon < a.epsilon for a, b in zip(recent[:-1], recent[1:]))


def _interleave_from_frame(candidate: FrameCandidate, level: int) -> InterleaveCertificate:
    moved = kalisch_iterate(0.0, candidate.start, candidate.vector).normalized()
    return InterleaveCertificate(
        strategy="S2",
        vector=encode_vector(moved),
        times=(candidate.peak - candidate.start, candidate.dip - candidate.start),
        norms=(candidate.theta, candidate.epsilon),
        level=level,
    )


def eigenframe_alignment(op: Operator, budget: Budget) -> Optional[Verdict]:
    base, factor, shift = normal_form(op)
    if not isinstance(base, Kalisch) or abs(shift) > EXACT_TOL or abs(abs(factor) - 1.0) > EXACT_TOL:
        return None
    # |c| = 1 multiplies every orbit by a unimodular phase, so norms are those of S itself
    best_history: List[FrameCandidate] = []
    pair_history: List[FrameCandidate] = []
    carried: Optional[StepFunction] = None
    for level in range(FRAME_MIN_LEVEL, budget.levels + 1):
        period = 2**level
        candidates = _frame_candidates(op, level, carried)
        pair = _frame_statistics(candidates[0], period)
        scored = [stats for stats in (_frame_statistics(c, period) for c in candidates[1:]) if stats is not None]
        if pair is not None:
            scored.append(pair)
        if not scored:
            continue
        best = max(scored, key=lambda item: item.score)
        carried = best.vector
        best_history.append(best)
        if pair is not None:
            pair_history.append(pair)
        logger.debug("S2 level %d: theta %.4g epsilon %.4g", level, best.theta, best.epsilon)
        for history in (best_history, pair_history):
            if _deepening_run(history):
                logger.info("S2 certificate at level %d", level)
                return _chaotic(_interleave_from_frame(history[-1], level))
    return None


# ----------------------------------------------------------------------
# S3: inverse-orbit interleave
# ----------------------------------------------------------------------
def _interleave_times(times: np.ndarray, norms: np.ndarray, dip_epsilon: float) -> Optional[Tuple[int, int, int]]:
    high = np.nonzero(norms >= PEAK_THRESHOLD)[0]
    if high.size < 2:
        return None
    first = high[0]
    lows = np.nonzero((norms <= dip_epsilon) & (np.arange(norms.size) > first))[0]
    for low in lows:
        later = high[high > low]
        if later.size:
            return int(first), int(low), int(later[0])
    return None


def inverse_interleave(op: Operator, budget: Budget) -> Optional[Verdict]:
    if not op.flags.invertible:
        return None
    try:
        family = generators(op, Strategy.INVERSE_ORBIT, budget.levels)
    except (UnsupportedStrategy, ContractViolation, NumericalError) as exc:
        logger.debug("S3 skipped: %s", exc)
        return None
    for vector in family.vectors:
        record = orbit(op, vector, budget.horizon)
        found = _interleave_times(record.times, record.norms, budget.dip_epsilon)
        if found is None:
            continue
        times = tuple(int(record.times[i]) for i in found)
        return _chaotic(
            InterleaveCertificate(
                strategy="S3",
                vector=encode_vector(vector),
                times=times,
                norms=tuple(float(record.norms[i]) for i in found),
            )
        )
    return None


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------
def _plateau(peaks: np.ndarray) -> bool:
    recent = peaks[-min(3, peaks.size) :]
    return float(np.max(recent)) <= float(np.min(recent)) * (1.0 + 1e-9)


def empirical_classify(op: Operator, budget: Budget) -> Verdict:
    """Run S1, S2, S3 in order; the first certificate wins."""
    tried: List[str] = []
    s1 = decay_span(op, budget)
    if s1.ran:
        tried.append("S1")
    if s1.verdict is not None:
        return s1.verdict

    verdict = eigenframe_alignment(op, budget)
    if verdict is not None:
        return verdict
    base = normal_form(op).base
    if isinstance(base, Kalisch):
        tried.append("S2")

    verdict = inverse_interleave(op, budget)
    if verdict is not None:
        return verdict
    if op.flags.invertible:
        tried.append("S3")

    report = s1.report
    if s1.ran and not s1.eigen_applicable:
        peaks = report.peaks() if report is not None else np.array([])
        bounded = peaks.size == 0 or (np.all(peaks <= BOUNDED_PEAK) and _plateau(peaks))
        if bounded and s1.outside_floor >= budget.dip_epsilon:
            bound = float(np.max(peaks)) if peaks.size else 0.0
            return _not_chaotic(BoundedBelowEvidence(floor=s1.outside_floor, peak_bound=bound))
    return Verdict(VerdictValue.UNDETERMINED, SearchExhausted(budget.to_serialisable(), tuple(tried)))


def classify(op: Operator, budget: Optional[Budget] = None, *, filters: bool = True) -> Verdict:
    """Analytic filters first (unless disabled), then the empirical strategies."""
    budget = budget or Budget()
    if filters:
        verdict = analytic_filters(op)
        if verdict is not None:
            return verdict
    return empirical_classify(op, budget)


# ----------------------------------------------------------------------
# Replay
# ----------------------------------------------------------------------
def _close(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= REPLAY_TOL * max(1.0, abs(a), abs(b))


def replay(op: Operator, verdict: Verdict, budget: Optional[Budget] = None) -> bool:
    """Recompute what the certificate cites and compare within REPLAY_TOL."""
    budget = budget or Budget()
    certificate = verdict.certificate
    if isinstance(certificate, AnalyticFilter):
        again = analytic_filters(op)
        return again is not None and again.value == verdict.value and again.certificate.name == certificate.name
    if isinstance(certificate, InterleaveCertificate):
        vector = decode_vector(certificate.vector)
        start = norm(vector)
        return all(
            _close(norm(iterate(op, t, vector)) / start, expected)
            for t, expected in zip(certificate.times, certificate.norms)
        )
    if isinstance(certificate, CriterionCertificate):
        outcome = decay_span(op, budget)
        if outcome.verdict is None or not isinstance(outcome.verdict.certificate, CriterionCertificate):
            return False
        fresh = outcome.verdict.certificate
        return fresh.x0 == certificate.x0 and all(
            _close(a, b) for a, b in zip(fresh.report.peaks(), certificate.report.peaks())
        )
    return empirical_classify(op, budget).value == verdict.value

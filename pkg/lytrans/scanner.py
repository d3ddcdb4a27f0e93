"""Rasterise the translation set over a grid of lambda values.

Grid point (row, col) sits at

    re = cx + hw * (2 col - (R - 1)) / (R - 1)
    im = cy + hh * ((R - 1) - 2 row) / (R - 1)

so row 0 is the top of the image and the center is always a grid point.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .classifier import AnalyticFilter, Verdict, VerdictValue, classify, oracle_membership
from .constants import MODEL_TOL, OVERLAY_COLOR, SCAN_MARGIN, VERDICT_COLORS
from .exceptions import ContractViolation, ParseError, RegionMismatch
from .operators import (
    Circle,
    ClosedDisk,
    FinitePointClosure,
    Operator,
    SpectrumModel,
    UnionModel,
    spectral_radius,
    translate,
)
from .schema import Budget, MetamorphicReport, ScanRegion, to_complex

logger = logging.getLogger(__name__)

TRUTH_SOURCES = ("empirical", "oracle")
HEADER_KEYS = ("fingerprint", "region", "resolution", "budget", "seed", "truth")
CODES = frozenset(value.value for value in VerdictValue)


# ----------------------------------------------------------------------
# Grid geometry
# ----------------------------------------------------------------------
def auto_region(op: Operator, resolution: int) -> ScanRegion:
    """Square of half-width 1 + spectral radius + margin, centered at 0."""
    half = 1.0 + spectral_radius(op) + SCAN_MARGIN
    return ScanRegion(center=(0.0, 0.0), half_width=half, half_height=half, resolution=resolution)


def _offset(half: float, index: int, resolution: int) -> float:
    if resolution == 1:
        return 0.0
    return half * (2 * index - (resolution - 1)) / (resolution - 1)


def grid_point(region: ScanRegion, row: int, col: int) -> complex:
    cx, cy = region.center
    r = region.resolution
    return complex(cx + _offset(region.half_width, col, r), cy - _offset(region.half_height, row, r))


def grid_points(region: ScanRegion) -> List[complex]:
    """Row-major lambda values; index = row * resolution + col."""
    r = region.resolution
    return [grid_point(region, row, col) for row in range(r) for col in range(r)]


def scan_bound(op: Operator) -> float:
    """Beyond this modulus lambda + op has spectrum off the unit circle."""
    return 1.0 + spectral_radius(op) + MODEL_TOL


# ----------------------------------------------------------------------
# Scan results
# ----------------------------------------------------------------------
@dataclass
class ScanResult:
    region: ScanRegion
    rows: List[str]
    fingerprint: str
    budget: Dict[str, Any]
    seed: int
    truth: str = "empirical"

    def __post_init__(self) -> None:
        r = self.region.resolution
        if len(self.rows) != r or any(len(row) != r for row in self.rows):
            raise ContractViolation(f"scan grid must be {r} x {r}")
        if any(ch not in CODES for row in self.rows for ch in row):
            raise ContractViolation("scan grid holds codes other than C/N/U")

    def code_at(self, row: int, col: int) -> str:
        return self.rows[row][col]

    def counts(self) -> Dict[str, int]:
        text = "".join(self.rows)
        return {code: text.count(code) for code in ("C", "N", "U")}

    def to_text(self) -> str:
        cx, cy = self.region.center
        header = {
            "fingerprint": self.fingerprint,
            "region": ",".join(repr(float(v)) for v in (cx, cy, self.region.half_width, self.region.half_height)),
            "resolution": str(self.region.resolution),
            "budget": json.dumps(self.budget, sort_keys=True, separators=(",", ":")),
            "seed": str(self.seed),
            "truth": self.truth,
        }
        lines = [f"{key} = {header[key]}" for key in HEADER_KEYS]
        return "\n".join(lines + self.rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ScanResult":
        lines = text.splitlines()
        if len(lines) < len(HEADER_KEYS):
            raise ParseError("scan result is truncated")
        header: Dict[str, str] = {}
        for number, line in enumerate(lines[: len(HEADER_KEYS)], start=1):
            key, sep, value = line.partition(" = ")
            if not sep or key != HEADER_KEYS[number - 1]:
                raise ParseError(f"expected header '{HEADER_KEYS[number - 1]}'", line=number)
            header[key] = value
        try:
            cx, cy, hw, hh = (float(v) for v in header["region"].split(","))
            region = ScanRegion(center=(cx, cy), half_width=hw, half_height=hh, resolution=int(header["resolution"]))
            budget = json.loads(header["budget"])
            seed = int(header["seed"])
        except (ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"malformed scan header: {exc}") from exc
        try:
            return cls(
                region=region,
                rows=lines[len(HEADER_KEYS) :],
                fingerprint=header["fingerprint"],
                budget=budget,
                seed=seed,
                truth=header["truth"],
            )
        except ContractViolation as exc:
            raise ParseError(str(exc)) from exc


# ----------------------------------------------------------------------
# Scanning
# ----------------------------------------------------------------------
def classify_point(op: Operator, lam: complex, budget: Budget, *, bound: Optional[float] = None) -> Verdict:
    """Verdict for lam + op; points past the spectral bound are never classified."""
    bound = scan_bound(op) if bound is None else bound
    if abs(lam) > bound:
        return Verdict(VerdictValue.NOT_CHAOTIC, AnalyticFilter("ScanBound", f"|lambda| > {bound:.6g}"))
    return classify(translate(op, lam), budget)


def oracle_code(op: Operator, lam: complex) -> str:
    answer = oracle_membership(op, lam)
    if answer is None:
        return VerdictValue.UNDETERMINED.value
    return VerdictValue.CHAOTIC.value if answer else VerdictValue.NOT_CHAOTIC.value


def _rows(codes: Sequence[str], resolution: int) -> List[str]:
    return ["".join(codes[row * resolution : (row + 1) * resolution]) for row in range(resolution)]


def scan(
    op: Operator,
    region: Optional[ScanRegion] = None,
    budget: Optional[Budget] = None,
    *,
    fingerprint: str = "",
    resolution: int = 101,
    truth: str = "empirical",
) -> ScanResult:
    """Classify lambda + op at every grid point."""
    if truth not in TRUTH_SOURCES:
        raise ContractViolation(f"truth must be one of {', '.join(TRUTH_SOURCES)}")
    budget = budget or Budget()
    region = region or auto_region(op, resolution)
    points = grid_points(region)
    bound = scan_bound(op)

    def evaluate(index: int) -> str:
        lam = points[index]
        if truth == "oracle":
            return oracle_code(op, lam)
        verdict = classify_point(op, lam, budget.with_seed(budget.seed ^ index), bound=bound)
        logger.debug("point %d (%s): %s", index, lam, verdict.code)
        return verdict.code

    if budget.workers > 1:
        with ThreadPoolExecutor(max_workers=budget.workers) as pool:
            codes = list(pool.map(evaluate, range(len(points))))
    else:
        codes = [evaluate(index) for index in range(len(points))]

    for index, code in enumerate(codes):
        if code == VerdictValue.CHAOTIC.value and abs(points[index]) > bound:
            raise ContractViolation(f"Chaotic verdict outside the spectral bound at {points[index]}")

    result = ScanResult(
        region=region,
        rows=_rows(codes, region.resolution),
        fingerprint=fingerprint,
        budget=budget.to_serialisable(),
        seed=budget.seed,
        truth=truth,
    )
    logger.info("scan finished: %s", result.counts())
    return result


# ----------------------------------------------------------------------
# Metamorphic laws
# ----------------------------------------------------------------------
def _same_region(ra: ScanRegion, rb: ScanRegion, *, tolerance: float = 1e-12) -> bool:
    return (
        ra.resolution == rb.resolution
        and abs(to_complex(ra.center) - to_complex(rb.center)) <= tolerance
        and abs(ra.half_width - rb.half_width) <= tolerance
        and abs(ra.half_height - rb.half_height) <= tolerance
    )


def _cells(resolution: int) -> Iterable[Tuple[int, int]]:
    return ((row, col) for row in range(resolution) for col in range(resolution))


def metamorphic_translation(scan_a: ScanResult, scan_b: ScanResult, shift: complex) -> MetamorphicReport:
    """scan_b (of shift + T) at mu must agree with scan_a (of T) at mu + shift."""
    expected = scan_a.region.shifted(-shift)
    if not _same_region(expected, scan_b.region) or scan_a.budget != scan_b.budget:
        raise RegionMismatch("second scan must cover the first region shifted by -lambda0 with the same budget")
    compared = ignored = 0
    disagreements: List[Tuple[int, int]] = []
    for row, col in _cells(scan_a.region.resolution):
        a, b = scan_a.code_at(row, col), scan_b.code_at(row, col)
        if "U" in (a, b):
            ignored += 1
            continue
        compared += 1
        if a != b:
            disagreements.append((row, col))
    return MetamorphicReport(law="translation", compared=compared, ignored=ignored, disagreements=disagreements)


def metamorphic_union(sum_scan: ScanResult, part_scans: Sequence[ScanResult]) -> MetamorphicReport:
    """Chaotic in the direct sum exactly where some part is Chaotic."""
    if not part_scans or not all(_same_region(sum_scan.region, part.region) for part in part_scans):
        raise RegionMismatch("union law needs scans over one common grid")
    compared = ignored = 0
    disagreements: List[Tuple[int, int]] = []
    for row, col in _cells(sum_scan.region.resolution):
        total = sum_scan.code_at(row, col)
        parts = [part.code_at(row, col) for part in part_scans]
        if total == "U":
            ignored += 1
            continue
        if "C" in parts:
            expected = "C"
        elif "U" in parts:
            ignored += 1
            continue
        else:
            expected = "N"
        compared += 1
        if (total == "C") != (expected == "C"):
            disagreements.append((row, col))
    return MetamorphicReport(law="union", compared=compared, ignored=ignored, disagreements=disagreements)


# ----------------------------------------------------------------------
# Rendering
# ----------------------------------------------------------------------
def _outline(model: SpectrumModel) -> Tuple[List[Tuple[complex, float]], List[complex]]:
    """(circles, points) whose union is the boundary of the model."""
    if isinstance(model, (ClosedDisk, Circle)):
        return [(model.center, model.radius)], []
    if isinstance(model, FinitePointClosure):
        return [], list(model.points)
    if isinstance(model, UnionModel):
        circles: List[Tuple[complex, float]] = []
        points: List[complex] = []
        for part in model.models:
            c, p = _outline(part)
            circles.extend(c)
            points.extend(p)
        return circles, points
    return [], []


def _cell_meets_circle(lo: complex, hi: complex, center: complex, radius: float) -> bool:
    nearest_x = min(max(center.real, lo.real), hi.real)
    nearest_y = min(max(center.imag, lo.imag), hi.imag)
    near = math.hypot(nearest_x - center.real, nearest_y - center.imag)
    far = max(
        math.hypot(x - center.real, y - center.imag) for x in (lo.real, hi.real) for y in (lo.imag, hi.imag)
    )
    return near <= radius <= far


def render(result: ScanResult, spectrum: Optional[SpectrumModel] = None) -> bytes:
    """Plain-text P3 pixmap with the unit circle and the spectrum outline overdrawn."""
    region = result.region
    r = region.resolution
    dx = region.half_width / (r - 1) if r > 1 else region.half_width
    dy = region.half_height / (r - 1) if r > 1 else region.half_height
    circles: List[Tuple[complex, float]] = [(0j, 1.0)]
    points: List[complex] = []
    if spectrum is not None:
        extra_circles, points = _outline(spectrum)
        circles.extend(extra_circles)

    lines = ["P3", f"{r} {r}", "255"]
    for row in range(r):
        pixels = []
        for col in range(r):
            z = grid_point(region, row, col)
            lo, hi = complex(z.real - dx, z.imag - dy), complex(z.real + dx, z.imag + dy)
            overlay = any(_cell_meets_circle(lo, hi, c, rad) for c, rad in circles) or any(
                lo.real <= p.real <= hi.real and lo.imag <= p.imag <= hi.imag for p in points
            )
            color = OVERLAY_COLOR if overlay else VERDICT_COLORS[result.code_at(row, col)]
            pixels.append(" ".join(str(v) for v in color))
        lines.append(" ".join(pixels))
    return ("\n".join(lines) + "\n").encode("ascii")

from __future__ import annotations

import pytest

from lytrans.constants import OVERLAY_COLOR, VERDICT_COLORS
from lytrans.exceptions import ContractViolation, ParseError, RegionMismatch
from lytrans.operators import ClosedDisk, DirectSum, make_operator, scale, translate
from lytrans.scanner import (
    ScanResult,
    auto_region,
    classify_point,
    grid_point,
    metamorphic_translation,
    metamorphic_union,
    render,
    scan,
    scan_bound,
)
from lytrans.schema import Budget, ScanRegion

FAST = Budget(horizon=64, levels=3)


def _region(half: float, resolution: int, center=(0.0, 0.0)) -> ScanRegion:
    return ScanRegion(center=center, half_width=half, half_height=half, resolution=resolution)


def _pixels(image: bytes):
    lines = image.decode("ascii").splitlines()
    rows = []
    for line in lines[3:]:
        values = [int(v) for v in line.split()]
        rows.append([tuple(values[i : i + 3]) for i in range(0, len(values), 3)])
    return lines[:3], rows


def test_grid_orientation():
    region = _region(1.0, 3)
    assert grid_point(region, 0, 0) == complex(-1.0, 1.0)
    assert grid_point(region, 1, 1) == 0
    assert grid_point(region, 2, 2) == complex(1.0, -1.0)


def test_auto_region(backward_shift):
    region = auto_region(backward_shift, 11)
    assert region.half_width == pytest.approx(2.25)
    assert region.center == (0.0, 0.0)
    assert scan_bound(backward_shift) == pytest.approx(2.0)


def test_points_past_the_bound_are_never_classified(backward_shift):
    verdict = classify_point(backward_shift, 2.5 + 0.5j, FAST)
    assert verdict.code == "N"
    assert verdict.certificate.name == "ScanBound"


def test_oracle_scan_of_backward_shift(backward_shift):
    result = scan(backward_shift, resolution=11, truth="oracle")
    assert result.code_at(5, 5) == "N"
    assert result.code_at(5, 6) == "C"
    assert result.code_at(0, 0) == "N"
    assert result.counts()["U"] == 0


def test_empirical_scan_matches_oracle(backward_shift):
    empirical = scan(backward_shift, budget=FAST, resolution=5)
    oracle = scan(backward_shift, budget=FAST, resolution=5, truth="oracle")
    assert empirical.rows == oracle.rows
    assert empirical.rows[2] == "NCNCN"


def test_scan_is_deterministic_across_workers(backward_shift):
    region = _region(1.8, 5)
    serial = scan(backward_shift, region, FAST, fingerprint="abc")
    parallel = scan(backward_shift, region, FAST.model_copy(update={"workers": 3}), fingerprint="abc")
    assert serial.to_text() == parallel.to_text()
    assert serial.to_text() == scan(backward_shift, region, FAST, fingerprint="abc").to_text()


def test_scan_rejects_unknown_truth(backward_shift):
    with pytest.raises(ContractViolation):
        scan(backward_shift, resolution=3, truth="guess")


def test_scan_result_text_format(backward_shift):
    result = scan(backward_shift, _region(1.8, 5, center=(0.1, -0.2)), FAST, fingerprint="f00d")
    text = result.to_text()
    lines = text.splitlines()
    assert lines[0] == "fingerprint = f00d"
    assert lines[2] == "resolution = 5"
    assert lines[5] == "truth = empirical"
    assert len(lines) == 6 + 5
    restored = ScanResult.from_text(text)
    assert restored.rows == result.rows
    assert restored.region == result.region
    assert restored.budget == result.budget


@pytest.mark.parametrize(
    "text",
    [
        "fingerprint = x\n",
        "fingerprint = x\nregion = 0,0,1,1\nresolution = 1\nbudget = {}\nseed = 0\nmode = oracle\nN\n",
        "fingerprint = x\nregion = 0,0,1\nresolution = 1\nbudget = {}\nseed = 0\ntruth = oracle\nN\n",
        "fingerprint = x\nregion = 0,0,1,1\nresolution = 3\nbudget = {}\nseed = 0\ntruth = oracle\nNNN\n",
        "fingerprint = x\nregion = 0,0,1,1\nresolution = 1\nbudget = {}\nseed = 0\ntruth = oracle\nX\n",
    ],
)
def test_scan_result_parse_errors(text):
    with pytest.raises(ParseError):
        ScanResult.from_text(text)


def test_all_not_chaotic_grid(forward_shift):
    result = scan(forward_shift, budget=FAST, resolution=3)
    assert result.rows == ["NNN", "NNN", "NNN"]


@pytest.mark.parametrize("shift", [0.5, complex(-0.3, 0.4)])
def test_translation_law(backward_shift, shift):
    region = _region(1.8, 5)
    scan_a = scan(backward_shift, region, FAST)
    scan_b = scan(translate(backward_shift, shift), region.shifted(-shift), FAST)
    report = metamorphic_translation(scan_a, scan_b, shift)
    assert report.passed
    assert report.compared == 25


def test_translation_law_needs_aligned_grids(backward_shift):
    region = _region(1.8, 5)
    scan_a = scan(backward_shift, region, FAST)
    with pytest.raises(RegionMismatch):
        metamorphic_translation(scan_a, scan_a, 0.5)


def test_union_law(backward_shift):
    parts = (backward_shift, scale(backward_shift, 2.0))
    region = _region(1.8, 5)
    total = scan(DirectSum(parts), region, FAST)
    report = metamorphic_union(total, [scan(part, region, FAST) for part in parts])
    assert report.passed
    assert total.counts()["C"] == 25


def test_union_law_flags_disagreement(backward_shift, forward_shift):
    region = _region(1.8, 5)
    calm = scan(forward_shift, region, FAST)
    report = metamorphic_union(calm, [scan(backward_shift, region, FAST)])
    assert not report.passed


def test_render_header_and_colors(backward_shift):
    result = scan(backward_shift, _region(1.8, 5), FAST)
    header, pixels = _pixels(render(result))
    assert header == ["P3", "5 5", "255"]
    assert len(pixels) == 5 and all(len(row) == 5 for row in pixels)
    assert pixels[2][2] == VERDICT_COLORS["N"]
    assert pixels[0][0] == VERDICT_COLORS["N"]
    assert any(OVERLAY_COLOR in row for row in pixels)


def test_render_spectrum_outline(backward_shift):
    result = scan(backward_shift, _region(1.8, 5), FAST)
    _, plain = _pixels(render(result))
    _, outlined = _pixels(render(result, ClosedDisk(1.8 + 0j, 0.1)))
    assert plain[2][4] != OVERLAY_COLOR
    assert outlined[2][4] == OVERLAY_COLOR


# ----------------------------------------------------------------------
# Full-size grids
# ----------------------------------------------------------------------
def _violations(result, expect):
    """Cells whose code differs from expect(lam); expect returns None inside a boundary band."""
    bad = []
    for row in range(result.region.resolution):
        for col in range(result.region.resolution):
            wanted = expect(grid_point(result.region, row, col))
            if wanted is not None and result.code_at(row, col) != wanted:
                bad.append((row, col))
    return bad


def _disk_rule(inner: float, outer: float, band: float = 0.05):
    def expect(lam: complex):
        r = abs(lam)
        if inner + band < r < outer - band:
            return "C"
        if r > outer + band or (inner > 0 and r < inner - band):
            return "N"
        return None

    return expect


@pytest.mark.slow
def test_backward_shift_translation_set(backward_shift):
    result = scan(backward_shift, resolution=101)
    assert result.region.half_width == pytest.approx(2.25)
    assert _violations(result, _disk_rule(0.0, 2.0)) == []
    assert result.code_at(50, 50) == "N"


@pytest.mark.slow
def test_scaled_shift_fills_the_disk(spec_path):
    op = make_operator(spec_path("bshift2.op").read_text(encoding="utf-8"))
    result = scan(op, _region(3.5, 101))
    assert _violations(result, lambda lam: "C" if abs(lam) < 2.95 else "N" if abs(lam) > 3.05 else None) == []


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fshift.op", "fshift_reciprocal.op", "diagonal_unimodular.op"])
def test_no_chaotic_cells(spec_path, name):
    op = make_operator(spec_path(name).read_text(encoding="utf-8"))
    assert scan(op, resolution=101).counts()["C"] == 0


@pytest.mark.slow
def test_compact_backward_shift_hugs_the_circle(reciprocal_backward):
    result = scan(reciprocal_backward, resolution=101)
    assert _violations(result, lambda lam: "N" if abs(abs(lam) - 1.0) > 0.05 else None) == []


def test_kalisch_oracle_is_the_center_pixel(kalisch):
    result = scan(kalisch, resolution=101, truth="oracle")
    assert result.counts()["C"] == 1
    assert result.code_at(50, 50) == "C"
    _, pixels = _pixels(render(result))
    assert pixels[50][50] == VERDICT_COLORS["C"]


@pytest.mark.slow
def test_full_scan_is_byte_identical(backward_shift):
    first = scan(backward_shift, resolution=101, fingerprint="bshift")
    second = scan(backward_shift, resolution=101, fingerprint="bshift")
    assert first.to_text() == second.to_text()
    assert render(first) == render(second)

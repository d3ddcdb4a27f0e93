from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lytrans.constants import TWO_PI
from lytrans.exceptions import ContractViolation, OutOfRange, Overflow, ZeroTranslation
from lytrans.kalisch import (
    Region,
    SampledFunction,
    StepFunction,
    circle_position,
    claim2_constants,
    claim_certificates,
    contracting_arc_claim,
    kalisch_apply,
    kalisch_iterate,
    peak_power_factor,
    project_region,
    reduce_angle,
    step_orbit_norms,
    verify_tn,
)


def test_reduce_angle():
    assert reduce_angle(-0.5) == pytest.approx(TWO_PI - 0.5)
    assert reduce_angle(TWO_PI + 1.0) == pytest.approx(1.0)
    assert reduce_angle(0.0) == 0.0


def test_indicator_norm_and_interval():
    f = StepFunction.indicator(1.0, 2.0)
    assert f.norm() == pytest.approx(2.0 * math.sqrt(TWO_PI - 1.0))
    g = StepFunction.interval(1.0, 3.0)
    assert g.norm() == pytest.approx(math.sqrt(2.0))
    assert np.allclose(g.evaluate([0.5, 1.0, 2.9, 3.0, 6.0]), [0, 1, 1, 0, 0])


def test_from_jumps_merges_repeated_points():
    f = StepFunction.from_jumps([2.0, 1.0, 2.0], [1.0, 1.0, -1.0])
    assert list(f.breakpoints) == [0.0, 1.0, 2.0]
    assert np.allclose(f.values, [0.0, 1.0, 1.0])
    assert f.simplify().breakpoints.size == 2


def test_step_function_rejects_bad_breakpoints():
    with pytest.raises(ContractViolation):
        StepFunction(np.array([0.5]), np.array([1.0]))
    with pytest.raises(ContractViolation):
        StepFunction(np.array([0.0, 2.0, 1.0]), np.array([1.0, 2.0, 3.0]))


def test_indicator_is_eigenfunction():
    alpha = 2.2
    f = StepFunction.indicator(alpha, 1.0 - 0.5j)
    image = kalisch_apply(f)
    assert (image - f * np.exp(1j * alpha)).norm() < 1e-14


def test_rotor_image_matches_its_antiderivative():
    # S e^{i t} = e^{2it} - int_0^t i e^{2is} ds = (1 + e^{2it}) / 2
    f = SampledFunction.from_callable(lambda theta: np.exp(1j * theta), panels=4096)
    image = kalisch_apply(f)
    expected = 0.5 * (1.0 + np.exp(2j * f.theta))
    assert np.max(np.abs(image.samples - expected)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(
    st.complex_numbers(max_magnitude=1.8, allow_nan=False, allow_infinity=False),
    st.integers(min_value=0, max_value=12),
)
def test_closed_form_matches_repeated_application(w, n):
    f = StepFunction.interval(0.3, 2.5, 1.0) + StepFunction.indicator(4.0, -2.0j)
    stepped = f
    for _ in range(n):
        stepped = stepped * w + kalisch_apply(stepped)
    closed = kalisch_iterate(w, n, f)
    scale = max(f.norm() * (abs(w) + 1.0) ** n, 1.0)
    assert (closed - stepped).norm() <= 1e-10 * scale


def test_negative_powers_invert_step_functions():
    f = StepFunction.interval(0.5, 2.0, 3.0)
    there = kalisch_iterate(2.5, 4, f)
    back = kalisch_iterate(2.5, -4, there)
    assert (back - f).norm() < 1e-10


def test_sampled_iterates_reject_negative_powers():
    f = SampledFunction.from_callable(np.cos, panels=256)
    with pytest.raises(ContractViolation):
        kalisch_iterate(0.5, -1, f)


def test_step_iterate_overflow():
    with pytest.raises(Overflow):
        kalisch_iterate(3.0, 1000, StepFunction.constant())


def test_step_orbit_norms_match_iterates():
    f = StepFunction.interval(0.5, 4.0, 1.0 + 1.0j)
    w = 0.4 - 0.2j
    norms = step_orbit_norms(f, w, 20)
    for n in (0, 1, 7, 20):
        assert norms[n] == pytest.approx(kalisch_iterate(w, n, f).norm(), rel=1e-12)


def test_step_orbit_norms_projection():
    f = StepFunction.constant()
    region = Region.h1(1.0)
    norms = step_orbit_norms(f, 0.0, 3, region=region)
    assert np.allclose(norms, 1.0)
    assert project_region(f, region).norm() == pytest.approx(1.0)


def test_step_orbit_norms_become_infinite_past_the_range():
    norms = step_orbit_norms(StepFunction.constant(), 3.0, 1000)
    assert math.isfinite(norms[100])
    assert math.isinf(norms[-1])


def test_circle_position_kinds():
    with pytest.raises(ZeroTranslation):
        circle_position(0.0)
    outside = circle_position(0.5)
    assert outside.kind == "pair" and not outside.wraps
    assert outside.one_plus_w == "outside"
    inside = circle_position(-0.5)
    assert inside.kind == "pair" and inside.wraps
    assert circle_position(2.0).kind == "tangent"
    assert circle_position(3.0j).kind == "none"


@pytest.mark.parametrize("w", [0.5, -0.5, 0.3j, 1 + 0.5j, -1.2 - 0.4j])
def test_intersections_lie_on_both_circles(w):
    for theta in circle_position(w).intersections:
        assert abs(w + np.exp(1j * theta)) == pytest.approx(1.0)


def test_claim2_constants_at_half():
    constants = claim2_constants(0.5)
    a, a0, b0, b = constants.rotated()
    assert 0.0 < a < a0 < b0 < b < TWO_PI
    assert constants.q == pytest.approx(math.sqrt(0.75))
    assert constants.m == pytest.approx(28.08, abs=0.01)
    assert set(constants.as_dict()) == {"a", "b", "a0", "b0", "d", "xi0", "q", "B", "M"}


def test_claim2_constants_need_two_intersections():
    with pytest.raises(OutOfRange):
        claim2_constants(2.5)


def test_peak_power_factor():
    assert peak_power_factor(0.5) == pytest.approx(1.0)
    n = np.arange(1, 200)
    assert peak_power_factor(0.95) == pytest.approx(float(np.max(n * 0.95 ** (n - 1.0))))
    with pytest.raises(ContractViolation):
        peak_power_factor(1.0)


def test_regions():
    assert list(Region.h4(5.0, 0.5).contains([4.9, 5.0, 5.4, 5.5])) == [False, True, True, False]
    assert Region.h3(5.0).contains([TWO_PI])[0]
    wrapped = Region.arc(6.0, 1.0)
    assert len(wrapped.intervals) == 2
    assert list(wrapped.contains([6.1, 0.5, 1.0])) == [True, True, False]
    with pytest.raises(ContractViolation):
        Region(((1.0, 7.0),))


def test_project_sampled_function():
    f = SampledFunction.from_callable(lambda theta: np.ones_like(theta, dtype=complex), panels=1024)
    projected = project_region(f, Region.h2(1.0, 2.0))
    assert projected.norm() == pytest.approx(1.0, rel=1e-2)


@pytest.mark.parametrize("w, layout", [(0.5, "outside"), (-0.5, "inside")])
def test_claim_certificates_pass(w, layout):
    report = claim_certificates(w, trials=4, seed=3)
    assert report.layout == layout
    assert [claim.claim for claim in report.claims] == [1, 2, 3]
    assert all(claim.passed for claim in report.claims), [claim.detail for claim in report.claims]
    assert report.claims[1].max_ratio <= report.constants["M"]
    assert report.claims[1].max_ratio >= 1.0 - 1e-12


def test_orbit_norms_ignore_breakpoints_without_a_jump():
    # breakpoint 0 carries no jump but |w + 1| = 1.5 would overflow long before n = 2000
    norms = step_orbit_norms(StepFunction.interval(2.5, 3.5), 0.5, 2000)
    assert np.all(np.isfinite(norms))
    assert norms[-1] < 1e-12 < norms[0]


def test_contracting_arc_claim_checks_real_ratios():
    outcome = contracting_arc_claim(0.5, trials=3, rng=np.random.default_rng(7))
    assert outcome.passed, outcome.detail
    assert 1.0 - 1e-12 <= outcome.max_ratio <= claim2_constants(0.5).m


@pytest.mark.parametrize("d", [0.3, 0.5, 1.0, 1.5])
@pytest.mark.parametrize("xi0", [0.0, math.pi / 3.0])
def test_uniform_bound_on_the_contracting_arc(d, xi0):
    w = d * complex(math.cos(xi0), math.sin(xi0))
    outcome = contracting_arc_claim(w, horizon=2000, trials=100, rng=np.random.default_rng(11))
    assert outcome.passed, outcome.detail
    assert math.isfinite(outcome.max_ratio) and outcome.max_ratio > 0.0


@pytest.mark.slow
@pytest.mark.parametrize("w", [0.3j, 1 + 0.5j, -1.2 - 0.4j])
def test_claim_certificates_pass_full(w):
    report = claim_certificates(w)
    assert all(claim.passed for claim in report.claims)


@pytest.mark.parametrize("w", [3.0, 2.0, complex(math.cos(2.0) - 1.0, math.sin(2.0))])
def test_claim_certificates_out_of_range(w):
    # the last value puts 1 + w on the unit circle
    with pytest.raises(OutOfRange):
        claim_certificates(w, trials=1)


@pytest.mark.parametrize("w", [0.0, 0.3, 0.5j])
def test_closed_form_identity(w):
    report = verify_tn(w, max_power=20, trials=2, seed=1)
    assert report.passed, report.max_relative_error


@pytest.mark.slow
@pytest.mark.parametrize("w", [0.3, -0.4 + 0.2j])
def test_closed_form_identity_full(w):
    assert verify_tn(w).passed

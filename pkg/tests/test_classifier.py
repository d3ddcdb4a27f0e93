from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from lytrans.classifier import (
    AnalyticFilter,
    BoundedBelowEvidence,
    CriterionCertificate,
    InterleaveCertificate,
    SearchExhausted,
    Verdict,
    VerdictValue,
    analytic_filters,
    classify,
    decay_span,
    decode_vector,
    encode_vector,
    inverse_interleave,
    nested_frame,
    oracle_membership,
    replay,
)
from lytrans.exceptions import ContractViolation
from lytrans.kalisch import StepFunction
from lytrans.operators import DirectSum, KernelVector, SeqVector, SumVector, make_operator, norm, scale, translate
from lytrans.schema import Budget


@pytest.mark.parametrize(
    "lam, value, name",
    [
        (0.0, "N", "Contraction"),
        (0.5, "C", "CowenDouglas"),
        (-1.2j, "C", "CowenDouglas"),
        (2.0, "N", "Expansive"),
        (2.5, "N", "SpectrumOffCircle"),
    ],
)
def test_backward_shift_filters(backward_shift, lam, value, name):
    verdict = analytic_filters(translate(backward_shift, lam))
    assert verdict.code == value
    assert verdict.certificate.name == name


def test_reciprocal_shift_filters(reciprocal_backward):
    assert analytic_filters(translate(reciprocal_backward, 1.0)).certificate.name == "Salas"
    assert analytic_filters(translate(reciprocal_backward, 0.5)).code == "N"


@pytest.mark.parametrize("lam", [1.0, 1j, cmath.exp(0.25j * math.pi)])
def test_compact_shift_is_chaotic_on_the_circle(reciprocal_backward, lam):
    verdict = classify(translate(reciprocal_backward, lam))
    assert verdict.code == "C"
    assert verdict.certificate.name == "Salas"


@pytest.mark.parametrize("lam", [0.0, 0.9, 1.1])
def test_compact_shift_off_the_circle(reciprocal_backward, lam):
    assert classify(translate(reciprocal_backward, lam)).code == "N"


def test_forward_shift_is_never_chaotic(forward_shift):
    for lam in (0.0, 0.5, 1.5j):
        assert analytic_filters(translate(forward_shift, lam)).code == "N"


def test_other_filters(kalisch):
    assert analytic_filters(translate(kalisch, 3.0)).certificate.name == "SpectrumOffCircle"
    normal = make_operator("kind = diagonal\nentries = 1; 0,1; -1\n")
    assert analytic_filters(normal).certificate.name == "Normal"
    assert analytic_filters(kalisch) is None


def test_direct_sum_filters(backward_shift, forward_shift):
    chaotic = analytic_filters(DirectSum((translate(backward_shift, 0.5), forward_shift)))
    assert chaotic.code == "C" and chaotic.certificate.name == "DirectSum"
    calm = analytic_filters(DirectSum((backward_shift, forward_shift)))
    assert calm.code == "N"


@pytest.mark.parametrize(
    "spec, lam, expected",
    [
        ("kind = backward_shift\nweights = constant 1\n", 1.99, True),
        ("kind = backward_shift\nweights = constant 1\n", 0.0, False),
        ("kind = backward_shift\nweights = constant 1\n", 2.0, False),
        ("kind = backward_shift\nweights = constant 2\n", 0.0, True),
        ("kind = backward_shift\nweights = reciprocal\n", cmath.exp(0.25j * math.pi), True),
        ("kind = backward_shift\nweights = reciprocal\n", 0.9, False),
        ("kind = kalisch\n", 0.0, True),
        ("kind = kalisch\n", 0.3j, False),
        ("kind = forward_shift\nweights = constant 1\n", 0.5, False),
        ("kind = backward_shift\nweights = list 1;2;tail=1\n", 0.5, None),
    ],
)
def test_oracle_membership(spec, lam, expected):
    assert oracle_membership(make_operator(spec), lam) is expected


def test_oracle_agrees_with_filters_on_a_line(backward_shift):
    for lam in (-1.9, -1.5, -0.7, 0.3, 1.0, 1.6, 1.95, 2.2, 3.0, 0.5j, -1.1j):
        verdict = analytic_filters(translate(backward_shift, lam))
        assert (verdict.code == "C") is oracle_membership(backward_shift, lam)


def test_encode_decode_vectors():
    vectors = [
        SeqVector(np.array([1.0, -2.0j])),
        KernelVector(0.3 + 0.1j, 0.5),
        StepFunction.interval(1.0, 2.0, 1j),
    ]
    vectors.append(SumVector(tuple(vectors[:2])))
    for vector in vectors:
        decoded = decode_vector(encode_vector(vector))
        assert type(decoded) is type(vector)
        assert norm(decoded) == pytest.approx(norm(vector))
    with pytest.raises(ContractViolation):
        decode_vector({"type": "matrix"})


def test_undetermined_needs_search_exhausted():
    with pytest.raises(ContractViolation):
        Verdict(VerdictValue.UNDETERMINED, AnalyticFilter("Normal"))
    verdict = Verdict("U", SearchExhausted({"horizon": 64}, ("S1",)))
    assert Verdict.from_dict(verdict.to_dict()).certificate.strategies == ("S1",)


def test_decay_span_certifies_translated_shift(backward_shift, quick_budget):
    op = translate(backward_shift, 0.5)
    verdict = classify(op, quick_budget, filters=False)
    assert verdict.code == "C"
    certificate = verdict.certificate
    assert isinstance(certificate, CriterionCertificate)
    assert len(certificate.x0) >= 2
    peaks = certificate.report.peaks()
    assert peaks[-1] >= 1e3
    assert np.all(np.diff(peaks[-3:]) > 0.0)
    assert set(certificate.dips) == {"RecurringToZero"}
    assert replay(op, verdict, quick_budget)
    restored = Verdict.from_dict(verdict.to_dict())
    assert replay(op, restored, quick_budget)


def test_decay_span_skips_function_space(kalisch, quick_budget):
    outcome = decay_span(kalisch, quick_budget)
    assert not outcome.ran
    assert outcome.verdict is None


def test_eigenframe_alignment_certifies_kalisch(kalisch, quick_budget):
    verdict = classify(kalisch, quick_budget)
    assert verdict.code == "C"
    certificate = verdict.certificate
    assert isinstance(certificate, InterleaveCertificate)
    assert certificate.strategy == "S2"
    theta, epsilon = certificate.norms
    assert theta > 1.0 > epsilon
    assert certificate.peak_time < certificate.dip_time
    assert replay(kalisch, verdict, quick_budget)


def test_unimodular_multiple_of_kalisch_is_chaotic(kalisch, quick_budget):
    verdict = classify(scale(kalisch, cmath.exp(0.7j)), quick_budget)
    assert verdict.code == "C"


@pytest.mark.parametrize("w", [0.5, -0.5, 0.3j, 1 + 0.5j, 2.0, 3.0])
def test_translated_kalisch_is_never_chaotic(kalisch, quick_budget, w):
    assert classify(translate(kalisch, w), quick_budget).code != "C"


def test_nested_frame_angles():
    assert np.allclose(nested_frame(3), [math.pi, 1.5 * math.pi, 1.25 * math.pi])


def test_bounded_below_evidence(quick_budget):
    op = make_operator("kind = diagonal\nentries = 0.5; 2\n")
    verdict = classify(op, quick_budget, filters=False)
    assert verdict.code == "N"
    assert isinstance(verdict.certificate, BoundedBelowEvidence)
    assert verdict.certificate.floor >= quick_budget.dip_epsilon


def test_undetermined_lists_strategies(kalisch, quick_budget):
    verdict = classify(translate(kalisch, 0.5), quick_budget)
    assert verdict.code == "U"
    assert "S3" in verdict.certificate.strategies
    assert "workers" not in verdict.certificate.budget
    assert replay(translate(kalisch, 0.5), verdict, quick_budget)


def test_inverse_interleave_needs_invertibility(backward_shift, quick_budget):
    assert inverse_interleave(translate(backward_shift, 0.5), quick_budget) is None


def test_replay_rejects_a_forged_filter(backward_shift):
    op = translate(backward_shift, 0.5)
    forged = Verdict("C", AnalyticFilter("Salas"))
    assert not replay(op, forged)
    assert replay(op, classify(op))


def test_replay_rejects_a_forged_interleave(kalisch, quick_budget):
    verdict = classify(kalisch, quick_budget)
    payload = verdict.to_dict()
    payload["certificate"]["norms"][0] *= 1.01
    assert not replay(kalisch, Verdict.from_dict(payload), quick_budget)


def test_budget_changes_do_not_matter_for_filters(backward_shift):
    op = translate(backward_shift, 0.5)
    assert classify(op, Budget(horizon=64, levels=3)).to_dict() == classify(op).to_dict()

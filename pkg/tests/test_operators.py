from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lytrans.constants import EIGEN_RADIUS_MARGIN
from lytrans.exceptions import ContractViolation, EmptyRegion, InvalidWeight, SpaceMismatch, UnsupportedStrategy
from lytrans.kalisch import StepFunction
from lytrans.operators import (
    BackwardShift,
    ClosedDisk,
    DirectSum,
    ForwardShift,
    Kalisch,
    KernelVector,
    Scale,
    SeqVector,
    Space,
    Strategy,
    SumVector,
    WeightRule,
    apply,
    describe,
    generators,
    inner,
    inverse_apply,
    iterate,
    make_operator,
    normal_form,
    norm,
    scale,
    spectral_radius,
    subtract,
    translate,
)


def _dense(op_weights: np.ndarray, *, backward: bool, size: int) -> np.ndarray:
    matrix = np.zeros((size, size), dtype=complex)
    for k in range(size - 1):
        if backward:
            matrix[k, k + 1] = op_weights[k]
        else:
            matrix[k + 1, k] = op_weights[k]
    return matrix


@pytest.mark.parametrize("rule", ["constant 1", "reciprocal", "geometric 0.9", "list 2;0.5;tail=1"])
@pytest.mark.parametrize("kind", ["backward_shift", "forward_shift"])
def test_iterate_matches_truncated_matrix(kind, rule):
    op = make_operator(f"kind = {kind}\nweights = {rule}\n")
    lam = 0.4 - 0.3j
    x = SeqVector(np.array([0.5, -1.0, 0.25j, 2.0]))
    n = 7
    size = x.support + n + 1
    matrix = _dense(op.weights.weights(1, size), backward=kind == "backward_shift", size=size)
    expected = np.linalg.matrix_power(lam * np.eye(size) + matrix, n) @ x.padded(size)
    got = iterate(translate(op, lam), n, x).padded(size)
    assert np.allclose(got, expected, rtol=1e-9, atol=1e-12)


def test_backward_shift_moves_coordinates_down():
    op = make_operator("kind = backward_shift\nweights = reciprocal\n")
    assert np.allclose(apply(op, SeqVector.basis(3)).coefficients, [0.0, 0.5])
    assert apply(op, SeqVector.basis(1)).support == 0


def test_forward_shift_moves_coordinates_up(forward_shift):
    assert np.allclose(apply(forward_shift, SeqVector.basis(2)).coefficients, [0.0, 0.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(
    st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
    st.integers(min_value=0, max_value=8),
    st.integers(min_value=0, max_value=8),
)
def test_iterate_composes(lam, m, n):
    op = translate(make_operator("kind = backward_shift\nweights = constant 1\n"), lam)
    x = SeqVector(np.array([1.0, -0.5, 0.25, 1j, 0.0, 2.0]))
    once = iterate(op, m + n, x)
    twice = iterate(op, m, iterate(op, n, x))
    size = max(once.support, twice.support, 1)
    scale_bound = (1.0 + abs(lam)) ** (m + n) * 4.0
    assert np.allclose(once.padded(size), twice.padded(size), rtol=1e-9, atol=1e-12 * scale_bound)


def test_kernel_vector_is_eigenvector(backward_shift):
    v = KernelVector(0.5 + 0.2j)
    image = apply(translate(backward_shift, 0.3), v)
    assert isinstance(image, KernelVector)
    assert image.coefficient == pytest.approx(0.3 + 0.5 + 0.2j)
    truncated = apply(translate(backward_shift, 0.3), v.truncated())
    assert np.allclose(truncated.coefficients[:20], image.truncated().coefficients[:20], atol=1e-15)


def test_kernel_vector_norm_matches_truncation():
    v = KernelVector(-0.7j, 2.0)
    assert v.norm() == pytest.approx(v.truncated().norm(), rel=1e-12)
    assert inner(Space.SEQUENCE, v, v) == pytest.approx(v.norm() ** 2)


def test_scale_folds_into_weights(backward_shift):
    doubled = scale(backward_shift, 2.0)
    assert isinstance(doubled, BackwardShift)
    assert doubled.weights.limit_modulus == pytest.approx(2.0)
    assert spectral_radius(doubled) == pytest.approx(2.0)


def test_scale_survives_only_over_kalisch(kalisch):
    op = scale(translate(kalisch, 0.5), 1j)
    base, factor, shift = normal_form(op)
    assert isinstance(base, Kalisch)
    assert factor == 1j
    assert shift == pytest.approx(0.5j)
    assert isinstance(op.inner, Scale)


def test_translations_add(backward_shift):
    op = translate(translate(backward_shift, 0.25), 0.5j)
    assert normal_form(op).shift == 0.25 + 0.5j
    assert translate(backward_shift, 0) is backward_shift


def test_spectrum_models(backward_shift, reciprocal_backward):
    spectrum = translate(backward_shift, 0.5).spectrum
    assert spectrum == ClosedDisk(0.5 + 0j, 1.0)
    assert spectral_radius(translate(backward_shift, 0.5)) == pytest.approx(1.5)
    assert not reciprocal_backward.spectrum.meets_unit_circle()
    assert translate(reciprocal_backward, 1j).spectrum.meets_unit_circle()


def test_flags(backward_shift, forward_shift):
    assert backward_shift.flags.cowen_douglas is not None
    assert not backward_shift.flags.invertible
    assert forward_shift.flags.isometry
    assert translate(backward_shift, 3).flags.invertible
    assert make_operator("kind = diagonal\nentries = 1; 0,1\n").flags.normal


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "geometric", "value": 2.0},
        {"kind": "constant", "value": 0.0},
        {"kind": "list", "values": (1.0, 0.0), "tail": 1.0},
        {"kind": "list", "values": (1.0,), "tail": 0.0},
    ],
)
def test_invalid_weights(kwargs):
    with pytest.raises(InvalidWeight):
        WeightRule(**kwargs)


def test_space_mismatch(kalisch, backward_shift):
    with pytest.raises(SpaceMismatch):
        apply(kalisch, SeqVector.basis(1))
    with pytest.raises(SpaceMismatch):
        iterate(backward_shift, 2, StepFunction.indicator(1.0))


def test_negative_power_rejected(backward_shift):
    with pytest.raises(ContractViolation):
        iterate(backward_shift, -1, SeqVector.basis(1))


@pytest.mark.parametrize("lam", [2.0, -3.0, 1.5j])
def test_inverse_of_translated_shift(backward_shift, lam):
    op = translate(backward_shift, lam)
    x = SeqVector(np.array([1.0, 2.0, -1.0, 0.5j]))
    back = apply(op, inverse_apply(op, x))
    assert np.allclose(back.padded(x.support), x.coefficients, atol=1e-12)


def test_inverse_requires_invertibility(backward_shift):
    with pytest.raises(ContractViolation):
        inverse_apply(backward_shift, SeqVector.basis(1))


def test_kalisch_inverse_on_step_functions(kalisch):
    op = translate(kalisch, 3.0)
    f = StepFunction.interval(0.5, 2.0)
    assert (apply(op, inverse_apply(op, f)) - f).norm() < 1e-12


def test_direct_sum_acts_partwise(backward_shift, forward_shift):
    op = DirectSum((backward_shift, forward_shift))
    x = SumVector((SeqVector.basis(2), SeqVector.basis(1)))
    image = iterate(op, 1, x)
    assert np.allclose(image.parts[0].coefficients, [1.0])
    assert np.allclose(image.parts[1].coefficients, [0.0, 1.0])
    assert op.space == Space.SUM


def test_basis_generators(backward_shift):
    family = generators(backward_shift, Strategy.BASIS, 4)
    assert [v.support for v in family.vectors] == [1, 2, 3, 4]


def test_eigen_inside_generators(backward_shift):
    op = translate(backward_shift, 0.5)
    family = generators(op, Strategy.EIGEN_INSIDE, 6)
    assert len(family.vectors) == 6
    for vector, eigenvalue in zip(family.vectors, family.eigenvalues):
        assert vector.norm() == pytest.approx(1.0)
        assert abs(eigenvalue) < 0.9
        assert abs(vector.ratio) <= EIGEN_RADIUS_MARGIN + 1e-12
        truncated = vector.truncated()
        residual = subtract(apply(op, truncated), truncated * eigenvalue)
        assert norm(residual) < 1e-12


def test_eigen_inside_empty_region(backward_shift):
    with pytest.raises(EmptyRegion):
        generators(translate(backward_shift, 1.95), Strategy.EIGEN_INSIDE, 4)


def test_basis_needs_sequence_space(kalisch):
    with pytest.raises(UnsupportedStrategy):
        generators(kalisch, Strategy.BASIS, 3)


def test_eigen_frame_generators(kalisch):
    family = generators(kalisch, Strategy.EIGEN_FRAME, 3)
    angles = 2.0 * math.pi * np.arange(1, 4) / 4
    assert np.allclose(family.eigenvalues, np.exp(1j * angles))
    for f, mu in zip(family.vectors, family.eigenvalues):
        assert (apply(kalisch, f) - f * mu).norm() < 1e-12


def test_inverse_orbit_generators(backward_shift):
    family = generators(translate(backward_shift, 3.0), Strategy.INVERSE_ORBIT, 3)
    assert all(v.norm() == pytest.approx(1.0) for v in family.vectors)


def test_describe(backward_shift):
    document = describe(translate(backward_shift, 0.5))
    assert document["operator"]["kind"] == "translate"
    assert document["operator"]["inner"]["kind"] == "backward_shift"
    assert document["space"] == "sequence"
    assert document["spectral_radius"] == pytest.approx(1.5)


def test_forward_shift_type(forward_shift):
    assert isinstance(forward_shift, ForwardShift)

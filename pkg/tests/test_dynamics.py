from __future__ import annotations

import math

import numpy as np
import pytest

from lytrans.constants import DEFAULT_HORIZON
from lytrans.dynamics import (
    DipKind,
    accepted_prefix,
    dip_classify,
    dyadic_windows,
    filtration,
    gram,
    level_horizon,
    orbit,
    orbit_of_sequence,
    pair_stats,
    restricted_gram,
    sample_times,
)
from lytrans.exceptions import ContractViolation, DegenerateBasis
from lytrans.operators import SeqVector, Strategy, generators, make_operator, translate


def test_sample_times_dense_prefix():
    assert list(sample_times(64)) == list(range(65))
    times = sample_times(256)
    assert list(times[:65]) == list(range(65))
    assert times[-1] == 256
    assert np.all(np.diff(times) > 0)
    assert times.size < 100


def test_dyadic_windows():
    assert dyadic_windows(8) == [(1, 2), (2, 4), (4, 8), (8, 9)]


def test_orbit_of_translated_backward_shift(backward_shift):
    rec = orbit(translate(backward_shift, 0.5), SeqVector.basis(1), 256)
    assert rec.norm_at(10) == pytest.approx(0.5**10)
    assert rec.to_rows()[3] == {"n": 3, "norm": pytest.approx(0.125)}
    assert dip_classify(rec).kind == DipKind.RECURRING_TO_ZERO


def test_norm_at_requires_a_sampled_time(backward_shift):
    rec = orbit(backward_shift, SeqVector.basis(1), 256)
    with pytest.raises(ContractViolation):
        rec.norm_at(65)


def test_orbit_rejects_tiny_seed(backward_shift):
    with pytest.raises(ContractViolation):
        orbit(backward_shift, SeqVector.basis(1) * 1e-9, 64)


def test_isometry_has_no_dip(forward_shift):
    assert dip_classify(orbit(forward_shift, SeqVector.basis(1), 128)).kind == DipKind.NO_DIP


@pytest.mark.parametrize("horizon", [64, DEFAULT_HORIZON])
def test_single_dip_then_growth(horizon):
    op = make_operator("kind = diagonal\nentries = 0.5; 2\n")
    rec = orbit(op, SeqVector(np.array([1.0, 1e-3])), horizon)
    assert dip_classify(rec).kind == DipKind.SINGLE_DIP_THEN_GROWTH


def test_recurring_bounded_below():
    rec = orbit_of_sequence(lambda n: 0.3 if n % 2 == 0 and n > 0 else 1.0, 256)
    verdict = dip_classify(rec)
    assert verdict.kind == DipKind.RECURRING_BOUNDED_BELOW
    assert verdict.level == pytest.approx(0.3)


def test_dip_classify_needs_horizon():
    rec = orbit_of_sequence(lambda n: 1.0, 32)
    with pytest.raises(ContractViolation):
        dip_classify(rec)


def test_gram_of_basis_is_identity():
    g = gram([SeqVector.basis(1), SeqVector.basis(2), SeqVector.basis(3)])
    assert np.allclose(g.entries, np.eye(3))


def test_accepted_prefix_skips_dependent_vectors():
    vectors = [SeqVector.basis(1), SeqVector.basis(1) * 2.0, SeqVector.basis(2)]
    assert accepted_prefix(vectors) == [0, 2]
    assert accepted_prefix(vectors, limit=1) == [0]


def test_restricted_gram_prunes_to_degenerate(backward_shift):
    with pytest.raises(DegenerateBasis):
        restricted_gram(backward_shift, [SeqVector.basis(1), SeqVector.basis(1)], 2)


def test_restricted_gram_of_shift(backward_shift):
    g = restricted_gram(backward_shift, [SeqVector.basis(1), SeqVector.basis(2), SeqVector.basis(3)], 1)
    assert np.allclose(g.entries, np.diag([0.0, 1.0, 1.0]))


@pytest.mark.parametrize("horizon, m, expected", [(2048, 1, 4096), (2048, 14, 32768), (65536, 4, 65536)])
def test_level_horizon(horizon, m, expected):
    assert level_horizon(horizon, m) == expected


def test_filtration_of_translated_shift(backward_shift):
    op = translate(backward_shift, 0.5)
    family = generators(op, Strategy.BASIS, 4)
    report = filtration(op, family.vectors, 4, 64)
    peaks = report.peaks()
    assert len(report.levels) == 4
    assert report.accepted == (0, 1, 2, 3)
    assert peaks[0] == pytest.approx(1.0)
    assert np.all(np.diff(peaks) >= -1e-9 * peaks[1:])
    assert np.all(report.floors() <= peaks)
    assert report.levels[0].floor < 1e-30
    assert report.to_rows()[-1]["accepted"] == "0 1 2 3"


def test_pair_statistics(forward_shift, backward_shift):
    high, low = pair_stats(forward_shift, SeqVector.basis(1), SeqVector.basis(2), 64)
    assert high == pytest.approx(math.sqrt(2.0))
    assert low == pytest.approx(math.sqrt(2.0))
    high, low = pair_stats(translate(backward_shift, 0.5), SeqVector.basis(1), SeqVector.basis(2), 64)
    assert low <= high < 1e-3
    with pytest.raises(ContractViolation):
        pair_stats(forward_shift, SeqVector.basis(1), SeqVector.basis(1), 64)

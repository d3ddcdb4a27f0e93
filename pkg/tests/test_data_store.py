from __future__ import annotations

import math

import pytest

from lytrans.data_store import ScanStore
from lytrans.dynamics import filtration, orbit
from lytrans.exceptions import ParseError
from lytrans.operators import SeqVector, Strategy, generators, translate
from lytrans.scanner import scan
from lytrans.schema import Budget, ScanRegion
from lytrans.tables import export_filtration, export_orbit, import_orbit


@pytest.fixture
def small_scan(backward_shift):
    region = ScanRegion(center=(0.0, 0.0), half_width=1.8, half_height=1.8, resolution=3)
    return scan(backward_shift, region, Budget(horizon=64, levels=3), fingerprint="cafe")


def test_save_and_load(tmp_path, small_scan):
    store = ScanStore(tmp_path / "scans" / "bshift.scan")
    saved = store.save(small_scan)
    assert saved.path.exists()
    assert saved.fingerprint == "cafe"
    assert not (tmp_path / "scans" / "bshift.scan.tmp").exists()
    loaded = ScanStore(saved.path).load()
    assert loaded.rows == small_scan.rows
    assert loaded.budget == small_scan.budget
    assert loaded.to_text() == small_scan.to_text()


def test_lock_file_sits_next_to_the_scan(tmp_path):
    store = ScanStore(tmp_path / "grid.scan")
    assert store.lock.lock_file.endswith("grid.scan.lock")


def test_missing_scan_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        ScanStore(tmp_path / "absent.scan").load()


def test_orbit_csv(tmp_path, backward_shift):
    record = orbit(translate(backward_shift, 3.0), SeqVector.basis(1), 64)
    path = export_orbit(tmp_path / "orbit.csv", record)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "n,norm"
    rows = import_orbit(path)
    assert len(rows) == 65
    assert rows[10]["norm"] == pytest.approx(3.0**10)


def test_orbit_csv_keeps_infinity(tmp_path, backward_shift):
    record = orbit(translate(backward_shift, 1e10), SeqVector.basis(1), 64)
    rows = import_orbit(export_orbit(tmp_path / "orbit.csv", record))
    assert math.isinf(rows[-1]["norm"])


def test_filtration_csv(tmp_path, backward_shift):
    op = translate(backward_shift, 0.5)
    report = filtration(op, generators(op, Strategy.BASIS, 3).vectors, 3, 64)
    lines = export_filtration(tmp_path / "filtration.csv", report).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "level,horizon,peak,floor,accepted"
    assert lines[-1].endswith("0 1 2")

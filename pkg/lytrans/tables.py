from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from .dynamics import FiltrationReport, OrbitRecord

ORBIT_FIELDS = ["n", "norm"]
FILTRATION_FIELDS = ["level", "horizon", "peak", "floor", "accepted"]


def _write_rows(path: Path, fields: Sequence[str], rows: Iterable[Dict[str, object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fields))
        writer.writeheader()
        for row in rows:
            writer.writerow({field: row.get(field, "") for field in fields})
    return path


def export_orbit(path: Path, record: OrbitRecord) -> Path:
    return _write_rows(path, ORBIT_FIELDS, record.to_rows())


def export_filtration(path: Path, report: FiltrationReport) -> Path:
    return _write_rows(path, FILTRATION_FIELDS, report.to_rows())


def import_orbit(path: Path) -> List[Dict[str, float]]:
    """Read an exported orbit back as (n, norm) rows; 'inf' survives the trip."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as handle:
        return [{"n": int(row["n"]), "norm": float(row["norm"])} for row in csv.DictReader(handle)]

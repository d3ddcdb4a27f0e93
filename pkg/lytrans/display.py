"""Terminal rendering of verdicts, reports and scans."""

from __future__ import annotations

import json
from typing import Any, Dict, Optional

from rich import box
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .classifier import Verdict
from .dynamics import FiltrationReport, OrbitRecord
from .scanner import ScanResult

VERDICT_STYLES: Dict[str, str] = {
    "C": "bold #ff6b6b",
    "N": "bold #8fb4ff",
    "U": "bold #e6d36a",
}
VERDICT_NAMES: Dict[str, str] = {"C": "Chaotic", "N": "NotChaotic", "U": "Undetermined"}


def verdict_panel(verdict: Verdict, *, title: str = "VERDICT") -> Panel:
    code = verdict.code
    body = Text()
    body.append(f"{code}  {VERDICT_NAMES[code]}\n", style=VERDICT_STYLES[code])
    body.append(json.dumps(verdict.certificate.to_dict(), indent=2), style="#d0e2ff")
    return Panel(body, title=title, border_style="#23629b", title_align="left")


def document_panel(payload: Dict[str, Any], *, title: str) -> Panel:
    return Panel(Text(json.dumps(payload, indent=2)), title=title, border_style="#23629b", title_align="left")


def orbit_table(record: OrbitRecord, *, limit: Optional[int] = None) -> Table:
    table = Table(box=box.SIMPLE_HEAD, title=f"ORBIT (N = {record.horizon})", title_justify="left")
    table.add_column("n", style="bold #c6e5ff", justify="right", no_wrap=True)
    table.add_column("||T^n x||", style="#f0f8ff", justify="right")
    rows = record.to_rows()
    for row in rows[:limit] if limit else rows:
        table.add_row(str(row["n"]), f"{row['norm']:.6e}")
    return table


def filtration_table(report: FiltrationReport) -> Table:
    table = Table(box=box.SIMPLE_HEAD, title="FILTRATION", title_justify="left")
    table.add_column("m", style="bold #c6e5ff", justify="right")
    table.add_column("N(m)", justify="right")
    table.add_column("peak", style="#ff8787", justify="right")
    table.add_column("floor", style="#a4ffd6", justify="right")
    for level in report.levels:
        table.add_row(str(level.level), str(level.horizon), f"{level.peak:.6g}", f"{level.floor:.6g}")
    return table


def scan_summary(result: ScanResult) -> Table:
    table = Table(box=box.SIMPLE_HEAD, show_header=False)
    table.add_column("", style="bold #b5e0ff")
    table.add_column("", style="white")
    cx, cy = result.region.center
    table.add_row("REGION", f"center ({cx:g}, {cy:g}), half sizes {result.region.half_width:g} x {result.region.half_height:g}")
    table.add_row("RESOLUTION", str(result.region.resolution))
    table.add_row("TRUTH", result.truth)
    for code, count in result.counts().items():
        table.add_row(Text(VERDICT_NAMES[code], style=VERDICT_STYLES[code]), str(count))
    return table

"""Command-line entry point.

Exit codes: 0 success, 1 a check ran and failed, 2 unparsable input, 3 any other
lytrans error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from . import __version__
from .classifier import CriterionCertificate, classify, oracle_membership
from .constants import (
    CLAIM_HORIZON,
    DEFAULT_HORIZON,
    DEFAULT_LEVELS,
    DEFAULT_PANELS,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
)
from .data_store import ScanStore
from .display import document_panel, filtration_table, orbit_table, scan_summary, verdict_panel
from .dynamics import dip_classify, orbit
from .exceptions import LyTransError, ParseError
from .kalisch import StepFunction, claim_certificates, verify_tn
from .operators import DirectSum, Operator, SeqVector, build_operator, describe, normalized, translate
from .scanner import auto_region, metamorphic_translation, metamorphic_union, render, scan
from .schema import Budget, ScanRegion
from .specfile import load_spec, parse_complex
from .tables import export_orbit

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_PARSE = 2
EXIT_ERROR = 3


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------
def _add_spec(parser: argparse.ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument("--spec", type=Path, required=required, help="operator spec file")


def _add_lambda(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", default=None, help="translation <re>,<im> (default: none)")


def _add_budget(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help=f"orbit horizon N (default {DEFAULT_HORIZON})")
    parser.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help=f"max filtration level M (default {DEFAULT_LEVELS})")
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help=f"random trials (default {DEFAULT_TRIALS})")
    parser.add_argument("--panels", type=int, default=DEFAULT_PANELS, help=f"Kalisch quadrature panels (default {DEFAULT_PANELS})")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--region", default=None, help="<cx>,<cy>,<hw>,<hh> (default: auto)")
    parser.add_argument("--resolution", type=int, default=101, help="odd points per axis (default 101)")
    parser.add_argument("--workers", type=int, default=1, help="parallel grid workers (default 1)")
    parser.add_argument("--truth", choices=("empirical", "oracle"), default="empirical")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lytrans", description="Li-Yorke translation set reconstruction")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="three-valued verdict for lambda + T")
    _add_spec(p)
    _add_lambda(p)
    _add_budget(p)
    p.add_argument("--out", type=Path, default=None, help="write the verdict document here")

    p = sub.add_parser("scan", help="rasterise the translation set")
    _add_spec(p)
    _add_grid(p)
    _add_budget(p)
    p.add_argument("--out", type=Path, default=None, help="ScanResult file")
    p.add_argument("--image", type=Path, default=None, help="P3 pixmap")

    p = sub.add_parser("orbit", help="orbit norms of one vector")
    _add_spec(p)
    _add_lambda(p)
    p.add_argument("--vector", default="e1", help="e<k> or step:<alpha> (default e1)")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--csv", type=Path, default=None, help="export rows to CSV")

    p = sub.add_parser("oracle", help="closed-form membership of lambda")
    _add_spec(p)
    p.add_argument("--lambda", dest="lam", required=True)

    p = sub.add_parser("verify-tn", help="closed-form Kalisch iterates against repeated application")
    p.add_argument("--w", default="0")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--panels", type=int, default=DEFAULT_PANELS)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("claims", help="Kalisch claim certificates for w")
    p.add_argument("--w", required=True)
    p.add_argument("--horizon", type=int, default=CLAIM_HORIZON)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--panels", type=int, default=DEFAULT_PANELS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("render", help="pixmap of a stored ScanResult")
    p.add_argument("--scan", type=Path, required=True, help="ScanResult file")
    p.add_argument("--image", type=Path, required=True)
    _add_spec(p, required=False)

    p = sub.add_parser("metamorphic", help="translation and union laws")
    _add_spec(p)
    p.add_argument("--law", choices=("translation", "union"), required=True)
    p.add_argument("--shift", default="0.5", help="lambda0 for the translation law (default 0.5)")
    _add_grid(p)
    _add_budget(p)

    p = sub.add_parser("describe", help="operator metadata")
    _add_spec(p)
    _add_lambda(p)
    return parser


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------
def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _budget(args: argparse.Namespace) -> Budget:
    fields = {key: getattr(args, key) for key in ("horizon", "levels", "trials", "panels", "seed") if hasattr(args, key)}
    if hasattr(args, "workers"):
        fields["workers"] = args.workers
    try:
        return Budget(**fields)
    except PydanticValidationError as exc:
        error = exc.errors()[0]
        raise ParseError(str(error["msg"]), field=str(error["loc"][0]) if error["loc"] else None) from exc


def _region(args: argparse.Namespace, op: Operator) -> ScanRegion:
    try:
        if args.region is None:
            return auto_region(op, args.resolution)
        values = [float(v) for v in args.region.split(",")]
        if len(values) != 4:
            raise ParseError("region needs <cx>,<cy>,<hw>,<hh>", field="region")
        return ScanRegion(
            center=(values[0], values[1]), half_width=values[2], half_height=values[3], resolution=args.resolution
        )
    except ValueError as exc:
        # pydantic's ValidationError is a ValueError too
        raise ParseError(f"bad region or resolution: {exc}", field="region") from exc


def _operator(args: argparse.Namespace) -> Operator:
    spec = load_spec(args.spec)
    op = build_operator(spec)
    lam = getattr(args, "lam", None)
    if lam is not None:
        op = translate(op, parse_complex(lam, field="lambda"))
    return op


def _vector(text: str):
    if text.startswith("e") and text[1:].isdigit():
        return SeqVector.basis(int(text[1:]))
    if text.startswith("step:"):
        return normalized(StepFunction.indicator(float(parse_complex(text[5:], field="vector").real)))
    raise ParseError(f"unknown vector '{text}'", field="vector")


def _emit(console: Console, payload: Dict[str, Any], out: Optional[Path]) -> None:
    text = json.dumps(payload, indent=2)
    console.print(text, markup=False, highlight=False)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------
def cmd_classify(args: argparse.Namespace, console: Console, err: Console) -> int:
    verdict = classify(_operator(args), _budget(args))
    console.print(verdict.code, markup=False, highlight=False)
    _emit(console, verdict.certificate.to_dict(), None)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(verdict.to_dict(), indent=2) + "\n", encoding="utf-8")
    err.print(verdict_panel(verdict))
    if isinstance(verdict.certificate, CriterionCertificate):
        err.print(filtration_table(verdict.certificate.report))
    return EXIT_OK


def cmd_scan(args: argparse.Namespace, console: Console, err: Console) -> int:
    spec = load_spec(args.spec)
    op = build_operator(spec)
    result = scan(op, _region(args, op), _budget(args), fingerprint=spec.fingerprint(), truth=args.truth)
    if args.out is not None:
        saved = ScanStore(args.out).save(result)
        logger.info("wrote %s", saved.path)
    else:
        console.print(result.to_text(), markup=False, highlight=False, end="")
    if args.image is not None:
        args.image.parent.mkdir(parents=True, exist_ok=True)
        args.image.write_bytes(render(result, op.spectrum))
    err.print(scan_summary(result))
    return EXIT_OK


def cmd_orbit(args: argparse.Namespace, console: Console, err: Console) -> int:
    op = _operator(args)
    record = orbit(op, _vector(args.vector), args.horizon)
    dip = dip_classify(record)
    if args.csv is not None:
        export_orbit(args.csv, record)
    console.print(orbit_table(record))
    console.print(f"dip: {dip.kind.value}" + (f" (floor {dip.level:.6g})" if dip.level is not None else ""))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, console: Console, err: Console) -> int:
    op = build_operator(load_spec(args.spec))
    answer = oracle_membership(op, parse_complex(args.lam, field="lambda"))
    console.print("unknown" if answer is None else str(answer).lower(), markup=False, highlight=False)
    return EXIT_OK


def cmd_verify_tn(args: argparse.Namespace, console: Console, err: Console) -> int:
    report = verify_tn(
        parse_complex(args.w, field="w"), args.n, trials=args.trials, panels=args.panels, seed=args.seed
    )
    _emit(console, report.model_dump(mode="json") | {"passed": report.passed}, None)
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def cmd_claims(args: argparse.Namespace, console: Console, err: Console) -> int:
    report = claim_certificates(
        parse_complex(args.w, field="w"), args.horizon, args.trials, seed=args.seed, panels=args.panels
    )
    _emit(console, report.to_serialisable(), args.out)
    err.print(document_panel(report.constants, title=f"CONSTANTS ({report.layout})"))
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def cmd_render(args: argparse.Namespace, console: Console, err: Console) -> int:
    result = ScanStore(args.scan).load()
    spectrum = None
    if args.spec is not None:
        spec = load_spec(args.spec)
        if spec.fingerprint() != result.fingerprint:
            logger.warning("spec fingerprint does not match the stored scan; outline may be wrong")
        spectrum = build_operator(spec).spectrum
    args.image.parent.mkdir(parents=True, exist_ok=True)
    args.image.write_bytes(render(result, spectrum))
    err.print(scan_summary(result))
    return EXIT_OK


def cmd_metamorphic(args: argparse.Namespace, console: Console, err: Console) -> int:
    spec = load_spec(args.spec)
    op = build_operator(spec)
    budget = _budget(args)
    region = _region(args, op)
    if args.law == "translation":
        shift = parse_complex(args.shift, field="shift")
        moved = spec.translated(shift)
        scan_a = scan(op, region, budget, fingerprint=spec.fingerprint(), truth=args.truth)
        scan_b = scan(
            build_operator(moved), region.shifted(-shift), budget, fingerprint=moved.fingerprint(), truth=args.truth
        )
        report = metamorphic_translation(scan_a, scan_b, shift)
    else:
        if not isinstance(op, DirectSum):
            raise ParseError("the union law needs a direct_sum spec", field="kind")
        total = scan(op, region, budget, fingerprint=spec.fingerprint(), truth=args.truth)
        parts = [scan(part, region, budget, truth=args.truth) for part in op.parts]
        report = metamorphic_union(total, parts)
    _emit(console, report.to_serialisable(), None)
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def cmd_describe(args: argparse.Namespace, console: Console, err: Console) -> int:
    _emit(console, describe(_operator(args)), None)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "scan": cmd_scan,
    "orbit": cmd_orbit,
    "oracle": cmd_oracle,
    "verify-tn": cmd_verify_tn,
    "claims": cmd_claims,
    "render": cmd_render,
    "metamorphic": cmd_metamorphic,
    "describe": cmd_describe,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.verbose)
    console = Console(soft_wrap=True)
    err = Console(stderr=True)
    try:
        return COMMANDS[args.command](args, console, err)
    except ParseError as exc:
        err.print(f"[bold red]parse error:[/] {escape(str(exc))}", highlight=False)
        return EXIT_PARSE
    except LyTransError as exc:
        err.print(f"[bold red]{type(exc).__name__}:[/] {escape(str(exc))}", highlight=False)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())

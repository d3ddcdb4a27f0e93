"""Parser for the line-oriented operator spec format.

Example::

    # the translate of a weighted backward shift
    kind = translate
    inner = base
    lambda = 0.5,0

    [base]
    kind = backward_shift
    weights = list 1;2;tail=1

Lines before the first ``[section]`` describe the root operator; sections are
named sub-operators referenced by ``inner = <name>`` and ``parts = <a>, <b>``.
Complex literals are ``<re>,<im>`` or a bare real; list items are separated by
``;`` because the comma belongs to the complex literal.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from pydantic import ValidationError as PydanticValidationError

from .exceptions import ParseError
from .schema import ComplexPair, OperatorSpec, WeightSpec

logger = logging.getLogger(__name__)

ROOT = ""
KNOWN_KEYS = {"kind", "weights", "entries", "lambda", "factor", "inner", "parts"}

Block = Dict[str, Tuple[int, str]]


def parse_complex(text: str, *, line: Optional[int] = None, field: Optional[str] = None) -> complex:
    """Parse ``re,im`` or a bare real into a finite complex number."""
    pieces = [piece.strip() for piece in text.strip().split(",")]
    if len(pieces) not in (1, 2) or not all(pieces):
        raise ParseError(f"malformed complex literal '{text}'", line=line, field=field)
    try:
        parts = [float(piece) for piece in pieces]
    except ValueError as exc:
        raise ParseError(f"malformed complex literal '{text}'", line=line, field=field) from exc
    if not all(math.isfinite(part) for part in parts):
        raise ParseError(f"non-finite complex literal '{text}'", line=line, field=field)
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def _pair(value: complex) -> ComplexPair:
    return value.real, value.imag


def parse_complex_list(text: str, *, line: Optional[int] = None, field: Optional[str] = None) -> Tuple[List[complex], Optional[complex]]:
    """Parse ``c1;c2;...;tail=c`` into the items and the optional tail."""
    items: List[complex] = []
    tail: Optional[complex] = None
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.startswith("tail="):
            if tail is not None:
                raise ParseError("tail given twice", line=line, field=field)
            tail = parse_complex(chunk[len("tail="):], line=line, field=field)
        else:
            if tail is not None:
                raise ParseError("tail must come last", line=line, field=field)
            items.append(parse_complex(chunk, line=line, field=field))
    if not items:
        raise ParseError("empty list", line=line, field=field)
    return items, tail


def parse_weights(text: str, *, line: Optional[int] = None) -> WeightSpec:
    head, _, rest = text.strip().partition(" ")
    rest = rest.strip()
    try:
        if head == "constant":
            return WeightSpec(kind="constant", value=_pair(parse_complex(rest, line=line, field="weights")))
        if head == "geometric":
            return WeightSpec(kind="geometric", value=_pair(parse_complex(rest, line=line, field="weights")))
        if head == "reciprocal":
            if rest:
                raise ParseError("reciprocal weights take no argument", line=line, field="weights")
            return WeightSpec(kind="reciprocal")
        if head == "list":
            items, tail = parse_complex_list(rest, line=line, field="weights")
            if tail is None:
                raise ParseError("list weights need tail=<c>", line=line, field="weights")
            return WeightSpec(kind="list", values=[_pair(item) for item in items], tail=_pair(tail))
    except PydanticValidationError as exc:
        raise ParseError(str(exc.errors()[0]["msg"]), line=line, field="weights") from exc
    raise ParseError(f"unknown weight rule '{head}'", line=line, field="weights")


def _split_blocks(text: str) -> Dict[str, Block]:
    blocks: Dict[str, Block] = {ROOT: {}}
    current = ROOT
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if not current or current in blocks:
                raise ParseError(f"bad or duplicate section '{stripped}'", line=number)
            blocks[current] = {}
            continue
        key, sep, value = stripped.partition("=")
        key = key.strip()
        if not sep:
            raise ParseError(f"expected 'key = value', got '{stripped}'", line=number)
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key '{key}'", line=number, field=key)
        if key in blocks[current]:
            raise ParseError(f"key '{key}' given twice", line=number, field=key)
        blocks[current][key] = (number, value.strip())
    return blocks


def _build(name: str, blocks: Dict[str, Block], visiting: Set[str]) -> OperatorSpec:
    if name in visiting:
        raise ParseError(f"section '{name}' references itself")
    block = blocks[name]
    if "kind" not in block:
        raise ParseError(f"section '{name or 'root'}' has no kind", field="kind")
    visiting = visiting | {name}
    fields: Dict[str, object] = {"kind": block["kind"][1]}

    def reference(ref: str, line: int, key: str) -> OperatorSpec:
        if ref not in blocks or ref == ROOT:
            raise ParseError(f"unknown section '{ref}'", line=line, field=key)
        return _build(ref, blocks, visiting)

    for key, (line, value) in block.items():
        if key == "weights":
            fields["weights"] = parse_weights(value, line=line)
        elif key == "entries":
            items, tail = parse_complex_list(value, line=line, field=key)
            fields["entries"] = [_pair(item) for item in items]
            if tail is not None:
                fields["entries_tail"] = _pair(tail)
        elif key in ("lambda", "factor"):
            fields["shift" if key == "lambda" else "factor"] = _pair(parse_complex(value, line=line, field=key))
        elif key == "inner":
            fields["inner"] = reference(value, line, key)
        elif key == "parts":
            refs = [ref.strip() for ref in value.split(",") if ref.strip()]
            if not refs:
                raise ParseError("parts needs at least one section", line=line, field=key)
            fields["parts"] = [reference(ref, line, key) for ref in refs]

    try:
        return OperatorSpec.model_validate(fields)
    except PydanticValidationError as exc:
        error = exc.errors()[0]
        loc = str(error["loc"][0]) if error["loc"] else "kind"
        key = {"shift": "lambda", "entries_tail": "entries"}.get(loc, loc)
        line = block[key][0] if key in block else block["kind"][0]
        raise ParseError(str(error["msg"]), line=line, field=key) from exc


def parse_spec(text: str) -> OperatorSpec:
    """Parse spec text into a validated OperatorSpec."""
    blocks = _split_blocks(text)
    if not blocks[ROOT]:
        raise ParseError("spec has no root operator (keys before the first section)")
    spec = _build(ROOT, blocks, set())
    logger.debug("parsed %s spec with %d section(s)", spec.kind, len(blocks) - 1)
    return spec


def load_spec(path: Path) -> OperatorSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read spec file {path}: {exc.strerror}") from exc
    return parse_spec(text)

"""JSON map configs and verification report documents.

Rationals are always written as ``[numerator, denominator]`` pairs and
complex numbers as ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .dynamics import CollatzMap, to_rational, validate_map
from .errors import MapValidationError, SchemaError
from .verify import residual

REPORT_SCHEMA = "collatz-gf-report"
REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MapConfig:
    name: str
    d: int
    m: tuple[int, ...]
    branches: tuple[dict, ...]

    def build(self) -> CollatzMap:
        raw = {}
        for br in self.branches:
            raw[tuple(br["r"])] = (br["A"], br["b"])
        return validate_map(self.d, self.m, raw)

    def to_dict(self) -> dict:
        return {"name": self.name, "d": self.d, "m": list(self.m), "branches": list(self.branches)}


def _pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def config_from_map(cmap: CollatzMap, name: str) -> MapConfig:
    branches = tuple(
        {
            "r": list(br.r),
            "A": [[_pair(v) for v in row] for row in br.A],
            "b": [_pair(v) for v in br.b],
        }
        for br in cmap.branches
    )
    return MapConfig(name, cmap.d, cmap.m, branches)


def parse_config(doc: dict) -> MapConfig:
    try:
        name = str(doc.get("name", "unnamed"))
        d = int(doc["d"])
        m = tuple(int(v) for v in doc["m"])
        branches = []
        for br in doc["branches"]:
            r = [int(v) for v in br["r"]]
            A = [[to_rational(v) for v in row] for row in br["A"]]
            b = [to_rational(v) for v in br["b"]]
            branches.append({"r": r, "A": [[_pair(v) for v in row] for row in A], "b": [_pair(v) for v in b]})
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MapValidationError(f"malformed map config: {exc}") from exc
    return MapConfig(name, d, m, tuple(branches))


def load_config(path) -> MapConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MapValidationError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(doc)


def save_config(cfg: MapConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def make_manifest(source: str, command: str, params: dict) -> dict:
    return {"source": source, "command": command, "params": params, "tool_version": __version__}


def build_report(manifest: dict, reports) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_SCHEMA_VERSION,
        "manifest": manifest,
        "checks": [r.to_dict() for r in reports],
    }


def write_report(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


_RECORD_KEYS = {"check", "inputs", "component", "lhs", "rhs", "abs_residual", "tolerance", "pass", "relation"}


def validate_report(doc: dict, where: str = "report") -> dict:
    """Check the schema and recompute every residual and pass flag from lhs/rhs/tolerance."""
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise SchemaError(f"{where}: not a {REPORT_SCHEMA} document")
    if doc.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise SchemaError(f"{where}: unsupported schema version {doc.get('schema_version')!r}")
    if "manifest" not in doc or not isinstance(doc.get("checks"), list):
        raise SchemaError(f"{where}: missing manifest or checks")
    for ci, chk in enumerate(doc["checks"]):
        recs = chk.get("records")
        if not isinstance(recs, list):
            raise SchemaError(f"{where}: check {ci} has no record list")
        for ri, rec in enumerate(recs):
            missing = _RECORD_KEYS - set(rec)
            if missing:
                raise SchemaError(f"{where}: check {ci} record {ri} lacks {sorted(missing)}")
            try:
                lhs = complex(*rec["lhs"])
                rhs = complex(*rec["rhs"])
                res = residual(lhs, rhs, rec["relation"])
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{where}: check {ci} record {ri}: {exc}") from exc
            if res != rec["abs_residual"]:
                raise SchemaError(
                    f"{where}: check {ci} record {ri}: stored residual {rec['abs_residual']!r} "
                    f"does not match |lhs - rhs| = {res!r}"
                )
            if (res <= rec["tolerance"]) != rec["pass"]:
                raise SchemaError(f"{where}: check {ci} record {ri}: pass flag inconsistent with residual and tolerance")
        if chk.get("all_pass") != all(r["pass"] for r in recs):
            raise SchemaError(f"{where}: check {ci}: all_pass inconsistent with its records")
    return doc


def read_report(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return validate_report(doc, str(path))


def aggregate(docs: dict) -> dict:
    """Merge validated reports: per check kind, the records, worst residual and a pass matrix.

    ``docs`` maps a label (usually the path) to a report document.
    """
    kinds: dict[str, dict] = {}
    for label, doc in docs.items():
        for chk in doc["checks"]:
            agg = kinds.setdefault(chk["kind"], {"records": [], "max_residual": 0.0, "sources": {}})
            agg["records"].extend(chk["records"])
            agg["max_residual"] = max(agg["max_residual"], max((r["abs_residual"] for r in chk["records"]), default=0.0))
            agg["sources"][label] = agg["sources"].get(label, True) and all(r["pass"] for r in chk["records"])
    for agg in kinds.values():
        agg["all_pass"] = all(r["pass"] for r in agg["records"])
        agg["n_records"] = len(agg["records"])
    return kinds

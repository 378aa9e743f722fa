"""Deterministic report emission: JSON reports, CSV tables, run directories.

Floats are written with ``repr`` (shortest round-trip decimal); non-finite values
become the strings ``"inf"``, ``"-inf"`` and ``"nan"`` so every report is strict JSON.
Wall-clock timings go to a separate ``timing.json`` so that ``report.json`` is a pure
function of the configuration and thread count.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from pathlib import Path
from typing import Iterable, Optional

import jsonschema
import numpy as np

__all__ = [
    "REPORT_SCHEMA",
    "OUTPUT_ENV",
    "to_jsonable",
    "dumps",
    "config_hash",
    "output_root",
    "run_directory",
    "build_report",
    "validate_report",
    "write_report",
    "write_timing",
    "write_csv",
    "read_csv",
    "csv_text",
]

OUTPUT_ENV = "DRIFTGEOM_OUTPUT"

_VERDICT = {
    "type": "object",
    "required": ["name", "value", "tolerance", "passed", "informational"],
    "properties": {
        "name": {"type": "string"},
        "tolerance": {},
        "passed": {"type": "boolean"},
        "informational": {"type": "boolean"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "driftgeom experiment report",
    "type": "object",
    "required": ["experiment", "config", "measured", "verdicts", "passed", "versions"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"type": "string", "minLength": 1},
        "config": {"type": "object"},
        "measured": {"type": "object"},
        "verdicts": {"type": "array", "items": _VERDICT},
        "passed": {"type": "boolean"},
        "versions": {
            "type": "object",
            "required": ["artifact", "config_hash", "backend", "threads"],
            "properties": {
                "artifact": {"type": "string"},
                "config_hash": {"type": "string", "pattern": "^[0-9a-f]{16}$"},
                "backend": {"type": "string", "enum": ["cython", "python"]},
                "threads": {"type": "integer", "minimum": 1},
            },
        },
    },
}


def _float(v: float):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, tuples and non-finite floats to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Canonical JSON text: fixed indentation, insertion order, trailing newline."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False, ensure_ascii=True) + "\n"


def config_hash(command: str, config: dict) -> str:
    text = json.dumps({"command": command, "config": to_jsonable(config)}, sort_keys=True, allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def output_root(explicit: Optional[str] = None) -> Path:
    """``explicit``, else ``$DRIFTGEOM_OUTPUT``, else ``./runs``."""
    return Path(explicit or os.environ.get(OUTPUT_ENV) or "runs")


def run_directory(root, command: str, config: dict) -> Path:
    """``root/<command>-<config hash>``; created if missing.  Distinct configs never share a directory."""
    slug = command.replace(" ", "-")
    path = Path(root) / f"{slug}-{config_hash(command, config)}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_report(experiment: str, config: dict, measured: dict, verdicts: list, *, version: str,
                 backend: str, threads: int) -> dict:
    """Assemble a report; ``passed`` ignores informational verdicts."""
    report = {
        "experiment": experiment,
        "config": to_jsonable(config),
        "measured": to_jsonable(measured),
        "verdicts": to_jsonable(verdicts),
        "passed": all(v["passed"] for v in verdicts if not v.get("informational", False)),
        "versions": {"artifact": version, "config_hash": config_hash(experiment, config),
                     "backend": backend, "threads": int(threads)},
    }
    validate_report(report)
    return report


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` does not match :data:`REPORT_SCHEMA`."""
    jsonschema.validate(report, REPORT_SCHEMA)


def write_report(directory, report: dict) -> Path:
    validate_report(report)
    path = Path(directory) / "report.json"
    path.write_text(dumps(report), encoding="utf-8")
    return path


def write_timing(directory, seconds: dict) -> Path:
    path = Path(directory) / "timing.json"
    path.write_text(dumps(seconds), encoding="utf-8")
    return path


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse(text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def read_csv(path) -> tuple:
    """``(header, rows)`` with integer and float cells parsed back to numbers."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(c) for c in row] for row in r]
    return header, rows

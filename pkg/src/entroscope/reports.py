"""Report emission: CSV (RFC-4180 quoting) and JSON with a stable schema.

Rows are flat mappings sharing one key set; floats are serialized with 17
significant digits, enough to round-trip float64 exactly.
"""

from __future__ import annotations

import csv
import json
from typing import Mapping, Sequence

FLOAT_FORMAT = "%.17g"


def format_float(x: float) -> str:
    return FLOAT_FORMAT % float(x)


def _normalize(value):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        # 17 significant digits round-trip float64 exactly
        return float(format_float(value))
    return str(value)


def _row_keys(rows: Sequence[Mapping]) -> list[str]:
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    return keys


def emit_report(rows: Sequence[Mapping], format: str, path) -> None:
    """Write rows to path; empty input still produces a valid document
    (header-only CSV, empty JSON row list)."""
    rows = list(rows)
    keys = _row_keys(rows)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
            writer.writerow(keys)
            for row in rows:
                writer.writerow([
                    format_float(row[k]) if isinstance(row.get(k), float)
                    and not isinstance(row.get(k), bool)
                    else row.get(k, "")
                    for k in keys
                ])
    elif format == "json":
        doc = {
            "schema": "entroscope-report-v1",
            "columns": keys,
            "rows": [{k: _normalize(row.get(k)) for k in keys} for row in rows],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path, format: str) -> list[dict]:
    if format == "json":
        with open(path) as fh:
            return json.load(fh)["rows"]
    if format == "csv":
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    raise ValueError(f"unknown report format {format!r}")

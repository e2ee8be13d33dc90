"""Report documents: named CSV tables plus one JSON summary per run."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DataError

REPORT_KINDS = ("metrics", "reliability", "validity", "agreement", "calibration", "mass-model")
SIG_DIGITS = 12


def fmt_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _round_json(obj):
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{SIG_DIGITS}g}")
    return obj


@dataclass
class Table:
    """A named table.  ``units`` maps every numeric column to a unit label;
    ``{unit}`` inside a label refers to the row's own ``unit`` column."""

    name: str
    columns: list[str]
    units: dict[str, str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([fmt_number(v) for v in r])


def read_csv_table(path: str | os.PathLike) -> list[dict]:
    """Parse an emitted table; numeric-looking cells come back as floats."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                try:
                    row[k] = float(v)
                except ValueError:
                    row[k] = v
            out.append(row)
    return out


@dataclass
class ReportDocument:
    kind: str
    inputs: dict
    tables: list[Table] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    generated_at: str | None = None
    # in-memory result objects, not serialized
    results: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in REPORT_KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def write(self, out_dir: str | os.PathLike, deterministic: bool = False) -> Path:
        out_dir = Path(out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {out_dir}: {exc}") from None
        stem = self.kind.replace("-", "_")
        meta_tables = []
        for t in self.tables:
            fname = f"{stem}_{t.name}.csv"
            t.write_csv(out_dir / fname)
            meta_tables.append(
                {"name": t.name, "file": fname, "columns": t.columns, "units": t.units, "n_rows": len(t.rows)}
            )
        if deterministic:
            stamp = None
        else:
            stamp = self.generated_at or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        doc = {
            "kind": self.kind,
            "generated_at": stamp,
            "inputs": self.inputs,
            "tables": meta_tables,
            "warnings": list(self.warnings),
            "summary": self.summary,
        }
        path = out_dir / f"{stem}_summary.json"
        path.write_text(json.dumps(_round_json(doc), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

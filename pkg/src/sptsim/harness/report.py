"""Versioned JSON and CSV reports.

JSON carries everything (config echo, seed, rows, diagnostics) with sorted
keys so files diff cleanly. CSV carries only the rows, one per point and
quantity, with a fixed column order per experiment, after a single
``# schema_version: N`` comment line.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1

# column name -> type, in output order
COLUMNS: dict[str, dict[str, type]] = {
    "entropy": {"L_A": int, "estimate": float, "stderr": float, "oracle": float},
    "resolved": {"L_A": int, "sector": str, "moment": int,
                 "estimate": float, "stderr": float, "oracle": float},
    "teleport": {"alpha": float, "beta": float, "state": str,
                 "fidelity": float, "stderr": float, "oracle": float},
    "classify-noise": {"L_A": int, "channel": str, "classification": str, "witness": float,
                       "sector_gap": float, "predicted_gap": float,
                       "sampled_gap": float, "sampled_stderr": float},
    "oracle": {"L_A": int, "quantity": str, "sector": str, "moment": int, "value": float},
}


class ReportError(ValueError):
    pass


@dataclass
class Report:
    experiment: str
    config: dict
    seed: int
    rows: list[dict]
    diagnostics: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "seed": self.seed,
            "config": self.config,
            "rows": self.rows,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ReportError(f"unsupported schema_version {d.get('schema_version')!r}")
        return cls(d["experiment"], d["config"], d["seed"], d["rows"],
                   d.get("diagnostics", {}), d["schema_version"])

    def column(self, name: str, **match) -> list:
        return [r[name] for r in self.rows if all(r.get(k) == v for k, v in match.items())]


def _clean(obj):
    """Plain JSON types only; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return int(obj)
    if hasattr(obj, "item"):
        return _clean(obj.item())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    raise ReportError(f"cannot serialise {type(obj).__name__}")


def to_json(report: Report) -> str:
    return json.dumps(_clean(report.to_dict()), sort_keys=True, indent=2) + "\n"


def from_json(text: str) -> Report:
    return Report.from_dict(json.loads(text))


def to_csv(report: Report) -> str:
    cols = COLUMNS.get(report.experiment)
    if cols is None:
        raise ReportError(f"no CSV schema for {report.experiment!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write(f"# schema_version: {report.schema_version}\n")
    w.writerow(list(cols))
    for row in report.rows:
        w.writerow(["" if row.get(c) is None else repr(row[c]) if isinstance(row[c], float) else row[c]
                    for c in cols])
    return buf.getvalue()


def rows_from_csv(text: str, experiment: str) -> list[dict]:
    cols = COLUMNS[experiment]
    first, _, body = text.partition("\n")
    if first.strip() != f"# schema_version: {SCHEMA_VERSION}":
        raise ReportError(f"unexpected CSV preamble {first!r}")
    reader = csv.reader(io.StringIO(body))
    header = next(reader)
    if header != list(cols):
        raise ReportError(f"CSV header {header} does not match {list(cols)}")
    rows = []
    for rec in reader:
        row = {}
        for name, cell in zip(header, rec):
            kind = cols[name]
            row[name] = cell if kind is str else (None if cell == "" else kind(cell))
        rows.append(row)
    return rows


def emit_report(report: Report, out_dir, fmt: str = "json", stem: str | None = None) -> Path:
    """Write ``<out_dir>/<stem>.<fmt>`` and return the path."""
    if fmt not in ("json", "csv"):
        raise ReportError("format must be json or csv")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem or report.experiment}.{fmt}"
    text = to_json(report) if fmt == "json" else to_csv(report)
    path.write_text(text)
    return path


def read_report(path, experiment: str | None = None):
    """JSON gives a :class:`Report`; CSV gives its rows (needs ``experiment``)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return from_json(text)
    if experiment is None:
        raise ReportError("reading CSV needs the experiment name")
    return rows_from_csv(text, experiment)

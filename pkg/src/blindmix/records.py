"""Trial records and their CSV / JSON persistence.

CSV output is two files: the per-iteration trace at ``path`` and one summary
row per trial at ``<stem>.summary.csv``. JSON output is a single document
``{"summary": [...], "trace": [...]}`` with the same columns.
"""

import csv
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .solvers import TraceRow

__all__ = [
    "SUMMARY_COLUMNS",
    "TRACE_COLUMNS",
    "TrialRecord",
    "read_records",
    "summary_path",
    "write_records",
]

KEY_COLUMNS = ["experiment", "encoder", "solver", "N", "K", "L", "s", "sigma", "kappa", "seed", "trial"]
TRACE_COLUMNS = KEY_COLUMNS + ["iter", "f", "grad_norm", "err", "time_ms"]
SUMMARY_COLUMNS = KEY_COLUMNS + ["success", "err", "iterations", "time_ms", "status"]

_INT = {"N", "K", "L", "s", "seed", "trial", "iter", "iterations"}
_FLOAT = {"sigma", "kappa", "f", "grad_norm", "err", "time_ms"}


@dataclass
class TrialRecord:
    experiment: str
    encoder: str
    solver: str
    N: int
    K: int
    L: int
    s: int
    sigma: float
    kappa: float
    seed: int
    trial: int
    success: bool
    err: float
    iterations: int
    time_ms: float
    status: str
    trace: list = field(default_factory=list)

    def key(self):
        return tuple(getattr(self, c) for c in KEY_COLUMNS)

    def summary_row(self):
        return {c: getattr(self, c) for c in SUMMARY_COLUMNS}

    def trace_rows(self):
        base = {c: getattr(self, c) for c in KEY_COLUMNS}
        return [dict(base, iter=r.iter, f=r.f, grad_norm=r.grad_norm, err=r.err, time_ms=r.time_ms)
                for r in self.trace]

    def __eq__(self, other):
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return all(_same(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))


def _same(a, b):
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            all(_same(getattr(p, f.name), getattr(q, f.name)) for f in fields(TraceRow))
            for p, q in zip(a, b)
        )
    return a == b


def _sort_key(rec):
    return (rec.experiment, rec.encoder, rec.solver, rec.N, rec.K, rec.L, rec.s,
            rec.sigma, rec.kappa, rec.seed, rec.trial)


def summary_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".summary" + path.suffix)


def _cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(col, v):
    if col in _INT:
        return int(v)
    if col in _FLOAT:
        return float(v)
    if col == "success":
        return v in ("1", "True", "true", True, 1)
    return v


def write_records(records, path, format="csv"):
    """Write records sorted by their configuration key; output is deterministic."""
    records = sorted(records, key=_sort_key)
    path = Path(path)
    try:
        if format == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(TRACE_COLUMNS)
                for rec in records:
                    for row in rec.trace_rows():
                        w.writerow([_cell(row[c]) for c in TRACE_COLUMNS])
            with open(summary_path(path), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(SUMMARY_COLUMNS)
                for rec in records:
                    row = rec.summary_row()
                    w.writerow([_cell(row[c]) for c in SUMMARY_COLUMNS])
        elif format == "json":
            doc = {
                "summary": [rec.summary_row() for rec in records],
                "trace": [row for rec in records for row in rec.trace_rows()],
            }
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True, default=_json_default)
                fh.write("\n")
        else:
            raise ValueError(f"unknown format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _assemble(summary, trace):
    by_key = {}
    for row in trace:
        key = tuple(row[c] for c in KEY_COLUMNS)
        by_key.setdefault(key, []).append(
            TraceRow(row["iter"], row["f"], row["grad_norm"], row["err"], row["time_ms"]))
    out = []
    for row in summary:
        key = tuple(row[c] for c in KEY_COLUMNS)
        out.append(TrialRecord(**{c: row[c] for c in SUMMARY_COLUMNS}, trace=by_key.get(key, [])))
    return out


def read_records(path, format="csv"):
    path = Path(path)
    if format == "csv":
        with open(path, newline="") as fh:
            trace = [{c: _parse(c, v) for c, v in row.items()} for row in csv.DictReader(fh)]
        with open(summary_path(path), newline="") as fh:
            summary = [{c: _parse(c, v) for c, v in row.items()} for row in csv.DictReader(fh)]
    elif format == "json":
        with open(path) as fh:
            doc = json.load(fh)
        summary = [{c: _parse(c, row[c]) for c in SUMMARY_COLUMNS} for row in doc["summary"]]
        trace = [{c: _parse(c, row[c]) for c in TRACE_COLUMNS} for row in doc["trace"]]
    else:
        raise ValueError(f"unknown format {format!r}")
    return _assemble(summary, trace)

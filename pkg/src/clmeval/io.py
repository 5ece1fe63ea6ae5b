"""Dataset CSV ingestion and report serialization.

Report JSON layout (keys in this order, extra keys of the report follow):

    {
      "tool": "clmeval",
      "version": "<package version>",
      "seed": <int or null>,
      "config": {...},          # echo of the measure / command settings
      ...                       # command specific fields, e.g. "score", "pairs"
    }

Floats are written with 12 significant digits; NaN and infinities become
``null``. The CSV form writes one row per entry of the report's ``pairs`` list
(or ``rows`` for table-like reports), with the report's scalar fields
repeated on every row.
"""

import csv
import io as _stdio
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoError, ParseError, SchemaError, TooFewRows

NORMALIZATIONS = ("min_max", "none")
_SIG = 12


@dataclass
class LabeledTable:
    dataset: np.ndarray
    labels: np.ndarray
    column_names: list
    source_path: str
    dropped_count: int = 0


def min_max(X):
    """Per-column affine map onto [0, 1]; constant columns become 0."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    live = span > 0
    out[:, live] = (X[:, live] - lo[live]) / span[live]
    return out


def load_csv(path, label_column="label", normalization="min_max"):
    """Read a labeled dataset. Rows with an empty feature or label cell are dropped."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as err:
        raise IoError(f"{path}: {err.strerror or err}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise SchemaError(f"{path}: label column {label_column!r} not found")
        li = header.index(label_column)
        feat_idx = [i for i in range(len(header)) if i != li]
        if not feat_idx:
            raise SchemaError(f"{path}: no feature columns")
        rows, labels, dropped = [], [], 0
        for line, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"{path}:{line}: expected {len(header)} cells, got {len(rec)}", row=line)
            label = rec[li].strip()
            values, missing = [], not label
            for i in feat_idx:
                cell = rec[i].strip()
                if not cell:
                    missing = True
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}:{line}: column {header[i]!r} value {cell!r} is not numeric",
                                     row=line, column=header[i]) from None
                if math.isnan(v):
                    missing = True
                elif math.isinf(v):
                    raise ParseError(f"{path}:{line}: column {header[i]!r} is infinite",
                                     row=line, column=header[i])
                values.append(v)
            if missing:
                dropped += 1
                continue
            rows.append(values)
            labels.append(label)
    if len(rows) < 2:
        raise TooFewRows(f"{path}: {len(rows)} usable row(s), need 2")
    X = np.array(rows, dtype=float)
    if normalization == "min_max":
        X = min_max(X)
    return LabeledTable(X, np.array(labels, dtype=object), [header[i] for i in feat_idx],
                        str(path), dropped)


def write_dataset_csv(path, X, labels, column_names=None):
    """Write features then a ``label`` column, floats with full round-trip precision."""
    X = np.asarray(X, dtype=float)
    names = list(column_names) if column_names else [f"f{j}" for j in range(X.shape[1])]
    try:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names + ["label"])
            for row, lab in zip(X, labels):
                w.writerow([repr(float(v)) for v in row] + [_plain(lab)])
    except OSError as err:
        raise IoError(f"{path}: {err.strerror or err}") from None


# ------------------------------------------------------------------ reports

def _plain(value):
    """Convert numpy scalars/arrays and tuples to JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{_SIG}g}")
    if isinstance(value, Path):
        return str(value)
    return value


def build_report(body, seed=None, config=None):
    """Prefix a report body with tool name, version, seed and config echo."""
    from . import __version__

    report = {"tool": "clmeval", "version": __version__, "seed": seed,
              "config": config if config is not None else body.get("config", {})}
    for key, value in body.items():
        if key not in report:
            report[key] = value
    return _plain(report)


def report_to_json(report):
    return json.dumps(_plain(report), indent=2, ensure_ascii=False) + "\n"


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{_SIG}g}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def report_to_csv(report):
    report = _plain(report)
    key = "pairs" if "pairs" in report else "rows" if "rows" in report else None
    scalars = {k: v for k, v in report.items() if not isinstance(v, (dict, list))}
    rows = report.get(key) or [{}] if key else [{}]
    cols = list(scalars)
    for row in rows:
        for c in row:
            if c not in cols:
                cols.append(c)
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        merged = {**scalars, **row}
        w.writerow([_cell(merged.get(c)) for c in cols])
    return buf.getvalue()


def write_report(report, path, format="json"):
    """Serialize ``report`` to ``path`` (``-`` for stdout) as json or csv."""
    if format == "json":
        text = report_to_json(report)
    elif format == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError("format must be 'json' or 'csv'")
    if str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    try:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as err:
        raise IoError(f"{path}: {err.strerror or err}") from None


def read_report(path):
    try:
        with Path(path).open(encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise IoError(f"{path}: {err.strerror or err}") from None

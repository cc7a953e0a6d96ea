"""CSV and JSON input/output.

CSV dialect: comma separated, ``.`` decimal point, LF line endings. Lines
starting with ``#`` are comments; the CLI uses one to embed its run
configuration. All writes are atomic (temporary file, then rename).
"""
import csv
import json
import math
import os
import tempfile

import numpy as np

from .exceptions import LabelError, ParseError


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, next(csv.reader([line]))


def read_csv_table(path, header=False):
    """Return ``(column_names or None, list of (lineno, fields))``."""
    names = None
    body = []
    for lineno, fields in _rows(path):
        if header and names is None:
            names = [f.strip() for f in fields]
            continue
        body.append((lineno, fields))
    if not body:
        raise ParseError(f"{path}: no data rows")
    return names, body


def _to_float(path, lineno, col, text):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{path}: line {lineno}, column {col + 1}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"{path}: line {lineno}, column {col + 1}: non-finite value {text!r}")
    return v


def read_matrix_csv(path, header=False):
    """Read a dense numeric matrix; ragged rows are rejected."""
    names, body = read_csv_table(path, header)
    width = len(names) if names is not None else len(body[0][1])
    out = np.empty((len(body), width))
    for r, (lineno, fields) in enumerate(body):
        if len(fields) != width:
            raise ParseError(f"{path}: line {lineno}: expected {width} fields, got {len(fields)}")
        for c, text in enumerate(fields):
            out[r, c] = _to_float(path, lineno, c, text)
    return out


def read_labeled_csv(path, header=False, label_column=-1):
    """Read features and 0/1 labels; the label column defaults to the last one.

    ``label_column`` is an integer index or, with ``header=True``, a name.
    """
    names, body = read_csv_table(path, header)
    width = len(names) if names is not None else len(body[0][1])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if names is None or label_column not in names:
            raise ParseError(f"{path}: label column {label_column!r} not found")
        col = names.index(label_column)
    else:
        col = int(label_column) % width
    full = read_matrix_csv(path, header)
    y = full[:, col]
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise LabelError(f"{path}: labels in column {col + 1} must be 0 or 1")
    x = np.delete(full, col, axis=1)
    return x, y.astype(np.int64)


def atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _comment(meta):
    if meta is None:
        return ""
    return "# " + json.dumps(sanitize(meta), sort_keys=True) + "\n"


def write_matrix_csv(path, m, meta=None):
    lines = [",".join(repr(float(v)) for v in row) for row in np.asarray(m)]
    atomic_write(path, _comment(meta) + "\n".join(lines) + "\n")


def write_rows_csv(path, rows, fields, meta=None):
    lines = [",".join(fields)]
    lines += [",".join(_fmt(row.get(f)) for f in fields) for row in rows]
    atomic_write(path, _comment(meta) + "\n".join(lines) + "\n")


def sanitize(obj):
    """Make ``obj`` JSON-safe: NumPy scalars/arrays to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj):
    atomic_write(path, json.dumps(sanitize(obj), indent=2, allow_nan=False) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

"""Deterministic CSV / JSON writers with atomic replacement."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

__all__ = ["SCHEMA_VERSION", "fmt_float", "write_csv", "write_json", "jsonable"]

SCHEMA_VERSION = 1


def fmt_float(x) -> str:
    # 17 significant digits round-trips every double
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    _atomic_write(path, buf.getvalue())


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt_float(x)
    return obj


def write_json(path, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **payload}
    _atomic_write(path, json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n")

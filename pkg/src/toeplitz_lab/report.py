"""Bit-stable JSON and CSV serialization of reports.

Floats are written with 17 significant digits, which round-trips every
double exactly; dictionaries keep their insertion order, so a report
produced twice from the same configuration serializes to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np


def _float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _plain(obj):
    """Convert numpy scalars, arrays and complex numbers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def _write(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.write(f"{pad}{json.dumps(k)}: ")
            _write(v, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.write("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            out.write("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.write("[\n")
        for i, v in enumerate(obj):
            out.write(pad)
            _write(v, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "]")
    else:
        out.write(_scalar(obj))


def _scalar(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _float(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(report, indent=2) -> str:
    buf = io.StringIO()
    _write(_plain(report), buf, indent, 0)
    buf.write("\n")
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return _float(v)
    return v


def dumps_csv(report) -> str:
    """CSV from a report's ``csv_rows()`` (the first row is the header)."""
    if not hasattr(report, "csv_rows"):
        raise TypeError(f"{type(report).__name__} has no CSV form")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in report.csv_rows():
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def emit_report(report, fmt="json", path=None):
    """Serialize ``report`` as ``fmt`` (``"json"`` or ``"csv"``) to ``path`` (stdout when ``None`` or ``"-"``)."""
    if fmt == "json":
        text = dumps_json(report)
    elif fmt == "csv":
        text = dumps_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def loads_json(text):
    return json.loads(text)

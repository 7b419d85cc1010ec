"""Deterministic text output: JSON with 17 significant digits, CSV, tables.

``json.dumps`` prints the shortest repr of a float, which is not a fixed
number of digits; everything here goes through ``%.17g`` (``%.10g`` for
tables) so that identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import MalformedInput

__all__ = ["fmt", "dumps", "csv_text", "table_text", "load_json"]


def fmt(x, digits=17):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = f"{x:.{digits}g}"
    return "0" if s == "-0" else s


def _encode(obj, digits, indent, level):
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj, digits)
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{fmt(obj.real, digits)}, {fmt(obj.imag, digits)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), digits, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, digits, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_encode(v, digits, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + close + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, digits=17, indent=2):
    """JSON text with every float printed as ``%.{digits}g``."""
    return _encode(obj, digits, indent, 0) + "\n"


def csv_text(header, rows, digits=17):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in rows:
        w.writerow([fmt(v, digits) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def table_text(header, rows, digits=10):
    cells = [[str(h) for h in header]]
    for row in rows:
        cells.append([fmt(v, digits) if isinstance(v, (float, np.floating)) else str(v) for v in row])
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} is not valid JSON: {exc}") from None

"""Text serialisation: floats at 17 significant digits, UTF-8, LF line endings.

Spectrum files are JSON documents written by a small custom emitter so that
every float carries exactly 17 significant digits (``json`` itself writes the
shortest round-trip form, which varies in length).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return fmt_float(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_emit(obj.real, indent, level)}, {_emit(obj.imag, indent, level)}]"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj)
        parts = [_emit(v, indent, level + 1) for v in obj]
        if flat:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _emit(obj, indent, 0) + "\n"


def write_document(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8", newline="\n")


def read_document(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def spectrum_document(values, meta: dict) -> dict:
    """Metadata followed by eigenvalues as ``[re, im]`` rows."""
    vals = np.asarray(values, dtype=complex)
    doc = dict(meta)
    doc["count"] = int(vals.size)
    doc["eigenvalues"] = [[v.real, v.imag] for v in vals]
    return doc

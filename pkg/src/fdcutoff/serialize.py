"""Deterministic text output: 17 significant digits, ``inf`` literals."""

from __future__ import annotations

import enum
import json
import math
from typing import Any, Optional

__all__ = ["format_number", "dumps"]


def format_number(x: float) -> str:
    """``x`` with 17 significant digits; ``inf``, ``-inf`` and ``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.17g}"
    return s if any(ch in s for ch in ".e") else s + ".0"


def _emit(obj: Any, indent, level: int) -> str:
    if indent is None:
        pad = end = ""
        open_sep, sep, close_sep = "", ", ", ""
    else:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        open_sep, sep, close_sep = "\n", ",\n", "\n"
    if isinstance(obj, enum.Enum):
        obj = obj.value
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = format_number(obj)
        # non-finite values have no JSON number form
        return json.dumps(s) if not math.isfinite(obj) else s
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + open_sep + sep.join(items) + close_sep + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[" + open_sep + sep.join(items) + close_sep + end + "]"
    if hasattr(obj, "item"):
        return _emit(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: Optional[int] = 2) -> str:
    """JSON text with floats at 17 significant digits and non-finite floats as strings.

    ``indent=None`` gives a single line.
    """
    return _emit(obj, indent, 0)

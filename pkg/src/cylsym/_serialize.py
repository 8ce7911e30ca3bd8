"""Deterministic text output: JSON and CSV writers with every float printed
at 17 significant digits, sorted keys, and no timestamps, so identical run
configurations produce byte-identical files."""

from __future__ import annotations

import math
from typing import Any


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_atom(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return f'"{format_float(value)}"'  # keep the JSON strictly valid
        return format_float(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"unserializable value of type {type(value)!r}: {value!r}")


def dumps_json(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            items.append(f'{inner}"{key}": {dumps_json(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_atom(obj)


def write_json(path, obj: Any) -> None:
    with open(str(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")


def csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, columns, rows, comments=()) -> None:
    """CSV with optional '# '-prefixed header comment lines (used to embed
    the resolved run configuration)."""
    with open(str(path), "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(csv_cell(v) for v in row) + "\n")

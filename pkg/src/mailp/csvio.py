"""Deterministic CSV emission with an embedded metadata header.

Metadata lines are '#'-prefixed and sit above the column header.  Floats are
written with 17 significant digits so values round-trip exactly; identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if "," in text or "\n" in text or "\r" in text:
        raise ValueError(f"CSV cell may not contain separators: {text!r}")
    return text


def emit_csv(path, columns: list[str], rows: list[tuple], metadata: dict) -> Path:
    path = Path(path)
    lines = []
    for key in metadata:
        value = metadata[key]
        lines.append(f"# {key}: {value}")
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != {len(columns)} columns")
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a file written by :func:`emit_csv`; cells come back as strings."""
    metadata: dict = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                metadata[key] = value
            elif not columns:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return metadata, columns, rows


def parse_float(cell: str) -> float:
    if cell == "nan":
        return math.nan
    return float(cell)

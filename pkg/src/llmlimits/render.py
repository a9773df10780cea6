"""Table rendering: markdown, CSV, and JSON with stable column schemas."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

_FORMATS = ("markdown", "csv", "json")


@dataclass(frozen=True)
class RenderTarget:
    """Output format and precision for rendered tables."""

    format: str = "markdown"
    precision: int = 3
    k_notation: bool = False

    def __post_init__(self):
        if self.format.lower() not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.format!r}")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")

    @property
    def fmt(self) -> str:
        return self.format.lower()


def sig(x: float, digits: int = 3) -> float:
    """Round to significant digits."""
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, digits - 1 - math.floor(math.log10(abs(x))))


def fmt_count(x: float, k_notation: bool, precision: int = 3) -> str:
    """Format a throughput count, optionally K/M-abbreviated (48000 -> 48K)."""
    if not k_notation:
        v = sig(x, precision)
        return str(int(v)) if float(v).is_integer() else str(v)
    if x >= 1e6:
        v = sig(x / 1e6, 2)
        return f"{v:g}M"
    if x >= 10_000:
        return f"{round(x / 1e3):g}K"
    if x >= 1000:
        return f"{x / 1e3:.1f}K"
    return f"{round(x):g}"


def fmt_cell(v, target: RenderTarget) -> str:
    if v is None:
        return "-"
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        s = sig(v, target.precision)
        return f"{s:g}"
    return str(v)


def render_markdown(headers: list[str], rows: list[list], target: RenderTarget) -> str:
    cells = [[fmt_cell(v, target) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    def line(vals):
        return "| " + " | ".join(v.ljust(w) for v, w in zip(vals, widths)) + " |"
    out = [line(headers), "| " + " | ".join("-" * w for w in widths) + " |"]
    out.extend(line(r) for r in cells)
    return "\n".join(out) + "\n"


def render_csv(headers: list[str], rows: list[list], target: RenderTarget) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([fmt_cell(v, target) for v in row])
    return buf.getvalue()


def render_json(headers: list[str], rows: list[list], target: RenderTarget) -> str:
    records = [
        {h: (sig(v, target.precision) if isinstance(v, float) else v)
         for h, v in zip(headers, row)}
        for row in rows
    ]
    return json.dumps(records, indent=2) + "\n"


def render_table(headers: list[str], rows: list[list], target: RenderTarget) -> str:
    renderer = {"markdown": render_markdown, "csv": render_csv, "json": render_json}[target.fmt]
    return renderer(headers, rows, target)

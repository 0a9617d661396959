"""Report serialization: one JSON object or one CSV table per run.

Serialization is fully deterministic: keys keep their construction order,
floats are printed with 17 significant digits, and newlines are always
'\\n'.  Wall time is logged to stderr but never written into the artifact,
so repeated runs of the same config produce byte-identical files.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = ["RunReport", "format_float", "render_json", "render_csv", "write_report"]

TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class RunReport:
    config: dict
    kind: str  # "kernel" | "verification" | "ids" | "moments" | "paths" | "oracle"
    payload: dict
    wall_time: float  # seconds; reported on stderr only
    csv_rows: tuple = ()  # (header, rows) when the kind has a table form
    figure_data: dict | None = None  # extra arrays for figures, never serialized

    @property
    def passed(self) -> bool | None:
        return self.payload.get("passed")

    def to_dict(self) -> dict:
        return {
            "tool": "fkbounds",
            "version": TOOL_VERSION,
            "kind": self.kind,
            "config": self.config,
            "result": self.payload,
        }


def format_float(x: float) -> str:
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".17g")


def _json_scalar(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x) or math.isinf(x):
            return '"%s"' % format_float(x)  # JSON has no nan/inf literals
        return format_float(x)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def render_json(obj: Any, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats, insertion order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {render_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{render_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, complex):
        return render_json({"re": obj.real, "im": obj.imag}, indent)
    return _json_scalar(obj)


def render_csv(header: tuple, rows) -> str:
    def cell(v) -> str:
        if isinstance(v, (float, np.floating)):
            return format_float(float(v))
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_report(report: RunReport, path: str | None, fmt: str) -> str:
    """Render the report and write it (stdout when path is None)."""
    if fmt == "json":
        text = render_json(report.to_dict()) + "\n"
    elif fmt == "csv":
        if not report.csv_rows:
            raise ValueError(f"report kind {report.kind!r} has no CSV form")
        header, rows = report.csv_rows
        text = render_csv(header, rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text

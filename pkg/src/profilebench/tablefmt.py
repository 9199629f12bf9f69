"""Rendering of report tables as CSV, Markdown, or JSON text."""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

FORMATS = ("csv", "markdown", "json")


def render_table(columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    """Render rows into one of the supported text formats.

    Cell values are written as-is for CSV/Markdown (via ``str``) and kept
    typed for JSON.  Output is deterministic for identical inputs.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(str(c) for c in columns) + " |",
            "| " + " | ".join("---" for _ in columns) + " |",
        ]
        for row in rows:
            lines.append("| " + " | ".join(str(cell) for cell in row) + " |")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [dict(zip(columns, row)) for row in rows]
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown format: {fmt!r}")

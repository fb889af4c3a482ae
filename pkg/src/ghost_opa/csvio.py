"""CSV emission and parsing.

Layout: one header row `name[unit]`, numeric data rows, then a trailing
`#`-prefixed metadata block carrying the tool version, command, seed, RNG
identifier, config hash and the full canonical config echo.  Floats are
written with repr (shortest round-trip form), so output is locale
independent and byte-stable; files are written atomically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import UsageError

CONFIG_BEGIN = "config-begin"
CONFIG_END = "config-end"


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


@dataclass
class CsvTable:
    """Header (column names with units), numeric rows and metadata lines
    (written `# `-prefixed after the data)."""

    header: list[str]
    rows: list[tuple]
    meta_lines: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        ncol = len(self.header)
        out = [",".join(self.header)]
        for row in self.rows:
            if len(row) != ncol:
                raise UsageError("CSV row width does not match the header")
            out.append(",".join(_format_cell(v) for v in row))
        for line in self.meta_lines:
            out.append(f"# {line}" if line else "#")
        return "\n".join(out) + "\n"


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(table: CsvTable, path: str) -> None:
    write_atomic(path, table.to_text())


def parse_csv_text(text: str) -> tuple[list[str], list[list[float]], list[str]]:
    """Split emitted CSV content into (header, numeric rows, meta lines)."""
    header: list[str] | None = None
    rows: list[list[float]] = []
    meta: list[str] = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("#"):
            meta.append(raw[1:].strip())
            continue
        if header is None:
            header = raw.split(",")
            continue
        rows.append([float(cell) for cell in raw.split(",")])
    if header is None:
        raise UsageError("CSV has no header row")
    return header, rows, meta


def extract_config_lines(meta_lines: list[str]) -> list[str]:
    """Pull the `key = value unit` echo out of a metadata block."""
    inside = False
    out = []
    for line in meta_lines:
        if line == CONFIG_BEGIN:
            inside = True
            continue
        if line == CONFIG_END:
            inside = False
            continue
        if inside:
            out.append(line)
    if not out:
        raise UsageError("metadata block carries no config echo")
    return out

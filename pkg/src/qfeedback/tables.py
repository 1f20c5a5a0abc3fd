"""CSV serialization: plot-ready numeric tables with a rerun-able header.

Format: '#'-prefixed header lines (tool name and version, the full command
echo, the seed when one applies), one column-name line, then comma-separated
rows rendered with 9 significant digits and line-feed endings.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

TOOL_NAME = "qfb"


def _version() -> str:
    from . import __version__
    return __version__


def render_value(x) -> str:
    return f"{float(x):.9g}"


def format_table(columns, rows, command: str = "", seed=None, meta=()) -> str:
    """Render a full CSV document to a string."""
    columns = list(columns)
    out = io.StringIO()
    out.write(f"# tool: {TOOL_NAME} {_version()}\n")
    if command:
        out.write(f"# command: {command}\n")
    if seed is not None:
        out.write(f"# seed: {seed}\n")
    for key, value in meta:
        out.write(f"# {key}: {value}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        if len(row) != len(columns):
            raise ParameterDomainError(
                f"row length {len(row)} does not match {len(columns)} columns")
        out.write(",".join("" if (isinstance(v, float) and np.isnan(v)) else render_value(v)
                           for v in row) + "\n")
    return out.getvalue()


def write_table(path, columns, rows, command: str = "", seed=None, meta=()):
    """Write atomically enough for our purposes: render fully, then write."""
    text = format_table(columns, rows, command=command, seed=seed, meta=meta)
    with open(path, "w", newline="") as fh:
        fh.write(text)


@dataclass(frozen=True)
class ParsedTable:
    meta: dict
    columns: list
    rows: np.ndarray  # (n, ncols); NaN for empty (missing-value) cells


def parse_table(text: str) -> ParsedTable:
    meta = {}
    columns = None
    rows = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = value.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append([float(tok) if tok else float("nan") for tok in line.split(",")])
    if columns is None:
        raise ParameterDomainError("no column header found")
    return ParsedTable(meta=meta, columns=columns,
                       rows=np.array(rows) if rows else np.empty((0, len(columns))))


def read_table(path) -> ParsedTable:
    with open(path, "r", newline="") as fh:
        return parse_table(fh.read())

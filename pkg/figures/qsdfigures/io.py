"""CSV access for the figure builders.

The simulator writes plain CSV with a ``# qsdbath-csv v1 <name>`` schema
line on top.  These readers check that line and the columns a figure
needs, and fail with the offending path and column names spelled out,
so a half-written or foreign directory is rejected instead of silently
producing an empty plot.
"""

from __future__ import annotations

import os

import numpy as np

SCHEMA = "qsdbath-csv v1"


class SchemaError(RuntimeError):
    """Input table is missing, malformed, or lacks required columns."""


def read_table(path: str, require: tuple[str, ...] = ()) -> tuple[str, dict[str, np.ndarray]]:
    """Read one schema-tagged CSV into a column dict.

    Returns (table_name, columns).  Numeric columns become float arrays;
    anything that does not parse stays as strings (e.g. fit model names).
    """
    if not os.path.isfile(path):
        raise SchemaError(f"{path}: missing input table")
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        prefix = f"# {SCHEMA} "
        if not first.startswith(prefix):
            raise SchemaError(f"{path}: missing '{SCHEMA}' schema line")
        name = first[len(prefix):].strip()
        header = fh.readline().strip()
        if not header:
            raise SchemaError(f"{path}: empty table (no header row)")
        columns = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(f"{path}: ragged row (expected {len(columns)} fields)")
    out: dict[str, np.ndarray] = {}
    for j, col in enumerate(columns):
        vals = [row[j] for row in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals, dtype=object)
    missing = [c for c in require if c not in out]
    if missing:
        raise SchemaError(
            f"{path}: table '{name}' lacks columns {', '.join(missing)}"
            f" (has {', '.join(columns)})"
        )
    return name, out


def run_table(root: str, *parts: str, require: tuple[str, ...] = ()):
    """read_table on a path assembled relative to the dataset root."""
    return read_table(os.path.join(root, *parts), require=require)

"""Plotting package for simulator output directories.

Everything here works off the CSV tables the simulator CLI writes; the
simulator itself is never imported, so the two packages stay decoupled
and the figures can be regenerated on any machine that has the data.
"""

from .io import SchemaError, read_table
from .figures import FIGURES, build

__all__ = ["FIGURES", "SchemaError", "build", "read_table"]

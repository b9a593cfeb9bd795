#!/usr/bin/env python3
"""Render fig08 (see qsdfigures.figures.build_fig08) from --input-dir to --out."""

from qsdfigures.main import run_one

if __name__ == "__main__":
    raise SystemExit(run_one("fig08"))

#!/usr/bin/env python3
"""Render fig11 (see qsdfigures.figures.build_fig11) from --input-dir to --out."""

from qsdfigures.main import run_one

if __name__ == "__main__":
    raise SystemExit(run_one("fig11"))

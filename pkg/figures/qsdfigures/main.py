"""Command-line entries shared by make_all and the per-figure scripts."""

from __future__ import annotations

import argparse
import os
import sys

import matplotlib.pyplot as plt

from . import style
from .figures import FIGURES, build
from .io import SchemaError


def _parser(prog: str, description: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog=prog, description=description)
    ap.add_argument("--input-dir", required=True,
                    help="dataset root holding the simulator CSV directories")
    ap.add_argument("--out", required=True,
                    help="directory the rendered PNGs are written to")
    return ap


def render(name: str, input_dir: str, out_dir: str) -> str:
    """Render one registered figure to <out_dir> and return the PNG path."""
    style.apply()
    fig = build(name, input_dir)
    _, filename = FIGURES[name]
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    # strip wall-clock metadata so identical inputs give identical bytes
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def run_one(name: str, argv=None) -> int:
    args = _parser(name, f"render {name} from a simulator dataset").parse_args(argv)
    try:
        print(render(name, args.input_dir, args.out))
    except SchemaError as exc:
        print(f"{name}: {exc}", file=sys.stderr)
        return 2
    return 0


def run_all(argv=None) -> int:
    args = _parser("make_all",
                   "render every figure from a simulator dataset").parse_args(argv)
    failures = 0
    for name in FIGURES:
        try:
            print(render(name, args.input_dir, args.out))
        except SchemaError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0

#!/usr/bin/env python3
"""Produce the dataset directory the figure scripts consume.

Drives the qsdbath CLI end to end: the pinned-frequency N=1 run with its
exact small-bath reference, the harmonic sweep, the bath-type sweep, the
anharmonic sweep, and the bound-state spectrum.  The resulting layout is

    <out>/
      revival/          observables.csv, levels.csv, oracle.csv, ...
      ho/N{n}/          harmonic sweep runs plus exponents.csv
      ho_types/         N{n}_s{s} runs, exponents.csv, scaling_fits.csv
      morse/N{n}/       anharmonic sweep runs plus summary tables
      morse_spectrum/   spectrum.csv, potential.csv

which is exactly what figures/make_all expects as --input-dir.

--quick swaps in a cheap variant (short horizon, few realizations) that
exercises the complete layout in a few minutes.  The default settings
match the long production runs and need serious CPU time; plan on many
hours per sweep on a single core.
"""

import argparse
import os
import sys
import textwrap

from qsdbath.cli import main as qsdbath

HO_NS = "0 1 10 20 50 100 500 1000"
TYPES_NS = "1 2 5 10 20 50 100 200 500"
TYPES_NS_QUICK = "1 5 20 100"
MORSE_NS = "0 1 10 50 100"


def _write_cfg(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(textwrap.dedent(text).lstrip())


def _call(argv) -> None:
    rc = qsdbath(argv)
    if rc != 0:
        raise SystemExit(f"qsdbath {' '.join(argv)} failed with exit {rc}")


def build_dataset(out: str, quick: bool, threads: int | None) -> None:
    cfgdir = os.path.join(out, "configs")
    thr = ["--threads", str(threads)] if threads is not None else []
    t_max = 50.0 if quick else 500.0
    quick_runs = "n_realizations = 8" if quick else "# defaults: 500"
    quick_morse = "n_realizations = 4" if quick else "# defaults: 500/200"

    cfg = os.path.join(cfgdir, "revival.cfg")
    _write_cfg(cfg, f"""
        # one resonant oscillator, frequency pinned near twice the system's
        [bath]
        n = 1
        frequency_override = 2.09
        [integrator]
        t_max = {t_max:g}
        [ensemble]
        {quick_runs}
        """)
    rundir = os.path.join(out, "revival")
    _call(["run", "-c", cfg, "-o", rundir] + thr)
    _call(["oracle", "-c", cfg, "-o", rundir, "--fock-cut", "12"])

    cfg = os.path.join(cfgdir, "ho.cfg")
    _write_cfg(cfg, f"""
        [integrator]
        t_max = {t_max:g}
        [ensemble]
        {quick_runs}
        [sweep]
        n_values = {HO_NS}
        """)
    _call(["sweep", "-c", cfg, "-o", os.path.join(out, "ho")] + thr)

    cfg = os.path.join(cfgdir, "ho_types.cfg")
    _write_cfg(cfg, f"""
        [integrator]
        t_max = {t_max:g}
        [ensemble]
        {quick_runs}
        [sweep]
        n_values = {TYPES_NS_QUICK if quick else TYPES_NS}
        s_values = 0.1 1.0 1.9
        """)
    _call(["sweep", "-c", cfg, "-o", os.path.join(out, "ho_types")] + thr)

    cfg = os.path.join(cfgdir, "morse.cfg")
    _write_cfg(cfg, f"""
        [system]
        kind = morse
        [integrator]
        t_max = {t_max:g}
        [ensemble]
        {quick_morse}
        [sweep]
        n_values = {MORSE_NS}
        """)
    _call(["sweep", "-c", cfg, "-o", os.path.join(out, "morse")] + thr)
    _call(["spectrum", "-c", cfg, "-o", os.path.join(out, "morse_spectrum")])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n", 1)[0])
    ap.add_argument("out", help="dataset directory to create")
    ap.add_argument("--quick", action="store_true",
                    help="cheap variant: t_max=50, 8 realizations")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for the ensemble runs")
    args = ap.parse_args(argv)
    if not args.quick:
        print("production settings: this takes many CPU-hours; use --quick"
              " for a smoke-test dataset", file=sys.stderr)
    build_dataset(args.out, args.quick, args.threads)
    print(f"dataset complete: {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

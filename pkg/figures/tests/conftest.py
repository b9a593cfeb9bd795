"""Fabricated dataset for the figure tests.

Builds the directory layout the figure builders expect, filled with
smooth synthetic curves written in the simulator's CSV dialect (schema
line + header + %.17g rows).  Numbers only need to be plausible enough
to exercise every code path; no simulator run is involved.
"""

from __future__ import annotations

import os

import numpy as np
import pytest


def write_csv(path: str, name: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    lines = [f"# qsdbath-csv v1 {name}", ",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(f"{v:.17g}")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


OBS_COLUMNS = ["t", "energy", "position", "momentum", "trace",
               "purity", "purity_normalized"]
FLOOR = 1.0 / 15.0


def _observables(path: str, alpha: float, revive: bool = False) -> None:
    t = np.arange(0.0, 200.1, 2.0)
    if revive:
        # flat energy with one dip and recovery, like a resonant revival
        energy = 7.5 - 1.5 * np.exp(-((t - 100.0) / 30.0) ** 2)
    else:
        energy = 7.5 * np.exp(-alpha * t) + 0.05
    envelope = np.exp(-alpha * t / 2.0)
    position = 2.0 * envelope * np.cos(1.1 * t)
    momentum = -2.0 * envelope * np.sin(1.1 * t)
    trace = np.ones_like(t)
    purity = (1.0 - FLOOR) * np.exp(-2.5 * alpha * t) + FLOOR
    write_csv(path, "observables", OBS_COLUMNS,
              zip(t, energy, position, momentum, trace, purity, purity))


def _levels(path: str, n_levels: int = 15) -> None:
    t = np.arange(0.0, 200.1, 2.0)
    rows = []
    for ti in t:
        for n in range(1, n_levels + 1):
            # crossing curves: high levels drain, low levels fill
            e = n * 0.5 * np.exp(-0.01 * ti) + (n_levels - n) * 0.02 \
                * (1.0 - np.exp(-0.01 * ti))
            rows.append((ti, n, e))
    write_csv(path, "levels", ["t", "n", "level_energy"], rows)


def _phase(path: str, damp: float) -> None:
    t = np.arange(0.0, 200.1, 2.0)
    q = 3.0 * np.exp(-damp * t) * np.cos(0.9 * t)
    p = -3.0 * np.exp(-damp * t) * np.sin(0.9 * t)
    write_csv(path, "phase", ["t", "q", "p"], zip(t, q, p))


def _fits(path: str, alpha: float) -> None:
    rows = [
        (1, "exponential", 0.0, 120.0, alpha, 7.5, 1e-4),
        (2, "power_law", 120.0, 200.0, 1.2, 40.0, 1e-4),
    ]
    write_csv(path, "fits",
              ["segment", "model", "t_lo", "t_hi", "exponent",
               "prefactor", "sse"], rows)


def _alpha_of(n: float, s: float) -> float:
    factor = {0.1: 0.8, 1.0: 1.0, 1.9: 1.2}[s]
    if n <= 30:
        return factor * 0.002 * n ** 0.749
    return factor * 0.002 * 30 ** 0.749 * (n / 30.0) ** 0.362


def fabricate(root: str) -> None:
    # single resonant run with its exact reference
    _observables(os.path.join(root, "revival", "observables.csv"),
                 alpha=0.0, revive=True)
    _observables(os.path.join(root, "revival", "oracle.csv"),
                 alpha=0.0, revive=True)
    _levels(os.path.join(root, "revival", "levels.csv"))

    # harmonic sweep
    for n in (0, 1, 10, 20, 50, 100, 500, 1000):
        d = os.path.join(root, "ho", f"N{n}")
        alpha = _alpha_of(max(n, 1), 1.0) if n else 0.0
        _observables(os.path.join(d, "observables.csv"), alpha)
        _phase(os.path.join(d, "phase.csv"), damp=alpha / 2.0)
        if n >= 10:
            _fits(os.path.join(d, "fits.csv"), alpha)
    _levels(os.path.join(root, "ho", "N10", "levels.csv"))

    # bath-type sweep summary tables
    rows = []
    for s in (0.1, 1.0, 1.9):
        for n in (1, 2, 5, 10, 20, 50, 100, 500):
            rows.append((n, s, _alpha_of(n, s),
                         1.6 * n ** -0.15, 150.0, True))
    write_csv(os.path.join(root, "ho_types", "exponents.csv"), "exponents",
              ["n", "s", "alpha", "beta", "t_break", "multi_regime"], rows)
    nan = float("nan")
    write_csv(os.path.join(root, "ho_types", "scaling_fits.csv"),
              "scaling_fits",
              ["s", "model", "segment", "n_lo", "n_hi", "exponent",
               "prefactor", "sse", "coeff_a", "coeff_b", "coeff_c"],
              [(1.0, "two_power_laws", 1, 1.0, 30.0, 0.749, 0.002,
                1e-4, nan, nan, nan),
               (1.0, "two_power_laws", 2, 30.0, 500.0, 0.362, 0.0073,
                1e-4, nan, nan, nan)])

    # anharmonic sweep
    morse_alpha = {n: 1e-5 * (0.0307 * n ** 2 + 2.25 * n + 22.9)
                   for n in (1, 10, 50, 100)}
    for n in (0, 1, 10, 50, 100):
        _observables(os.path.join(root, "morse", f"N{n}", "observables.csv"),
                     morse_alpha.get(n, 0.0))
    rows = [(0, 1.0, nan, nan, nan, False)]
    rows += [(n, 1.0, a, nan, nan, False) for n, a in morse_alpha.items()]
    write_csv(os.path.join(root, "morse", "exponents.csv"), "exponents",
              ["n", "s", "alpha", "beta", "t_break", "multi_regime"], rows)
    write_csv(os.path.join(root, "morse", "scaling_fits.csv"),
              "scaling_fits",
              ["s", "model", "segment", "n_lo", "n_hi", "exponent",
               "prefactor", "sse", "coeff_a", "coeff_b", "coeff_c"],
              [(1.0, "quadratic", 1, 0.0, 100.0, 3.07e-7, 2.29e-4,
                1e-6, 3.07e-7, 2.25e-5, 2.29e-4)])

    # bound-state spectrum over its well
    r = np.arange(-7.4, 20.0 + 1e-9, 0.05)
    v = 30.0 * (1.0 - np.exp(-0.08 * r)) ** 2
    write_csv(os.path.join(root, "morse_spectrum", "potential.csv"),
              "potential", ["r", "v"], zip(r, v))
    ns = np.arange(1, 39)
    omega0 = 0.08 * np.sqrt(2.0 * 30.0)
    energies = omega0 * (ns - 0.5) - 0.0032 * (ns - 0.5) ** 2
    write_csv(os.path.join(root, "morse_spectrum", "spectrum.csv"),
              "spectrum", ["n", "energy"], zip(ns, energies))


@pytest.fixture(scope="session")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    fabricate(str(root))
    return str(root)

"""Figure builders over a simulator dataset directory.

Expected dataset layout (produced by scripts/make_dataset.py in the
simulator repo, or by hand with the qsdbath CLI):

    <input-dir>/
      revival/          one N=1 run with the bath frequency pinned near
                        twice the oscillator frequency; observables.csv,
                        levels.csv, and the exact-reference oracle.csv
      ho/N{n}/          ohmic harmonic sweep, n = 0,1,10,20,50,100,500,1000
      ho_types/         bath-type sweep, N{n}_s{s} run dirs for
                        s = 0.1,1.0,1.9 plus exponents.csv/scaling_fits.csv
      morse/N{n}/       anharmonic sweep, n = 0,1,10,50,100, plus
                        exponents.csv/scaling_fits.csv
      morse_spectrum/   spectrum.csv and potential.csv

Each builder takes the dataset root and returns a matplotlib Figure; the
registry at the bottom maps figure names to (builder, output filename).
Only the CSV tables are consumed, never the simulator package.
"""

from __future__ import annotations

import os

import numpy as np
import matplotlib.pyplot as plt

from .io import SchemaError, read_table, run_table

# mixed-state floor of a 15-level system, drawn as a reference line
PURITY_FLOOR = 1.0 / 15.0

HO_SWEEP_NS = (1, 10, 20, 50, 100, 500)
PHASE_NS = (0, 1, 10, 20, 50, 100, 500, 1000)
MORSE_NS = (0, 1, 10, 50, 100)
PACKET_WINDOW = (9, 23)


def _overlay_fits(ax, path: str, color: str = "0.15") -> None:
    """Draw the fitted segments from a fits.csv on top of a decay curve."""
    _, fit = read_table(path, require=("model", "t_lo", "t_hi",
                                       "exponent", "prefactor"))
    for model, lo, hi, expo, pref in zip(fit["model"], fit["t_lo"],
                                         fit["t_hi"], fit["exponent"],
                                         fit["prefactor"]):
        t = np.linspace(float(lo), float(hi), 200)
        if str(model) == "exponential":
            y = pref * np.exp(-expo * t)
        elif str(model) == "power_law":
            t = t[t > 0]
            y = pref * t ** (-expo)
        else:
            continue
        ax.plot(t, y, ls="--", lw=1.0, color=color, label="_fit")


def _maybe_overlay_fits(ax, path: str, color: str = "0.15") -> None:
    if os.path.isfile(path):
        _overlay_fits(ax, path, color=color)


def _level_curves(ax, root: str, *parts: str) -> None:
    """Plot one energy-weighted population curve per system level."""
    _, lev = run_table(root, *parts, require=("t", "n", "level_energy"))
    ns = np.unique(lev["n"].astype(int))
    for n in ns:
        mask = lev["n"].astype(int) == n
        t = lev["t"][mask]
        y = lev["level_energy"][mask]
        ax.plot(t, y, lw=0.8)
        ax.annotate(str(int(n)), (t[-1], y[-1]),
                    textcoords="offset points", xytext=(3, -2), fontsize=7)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\epsilon_n\,\langle |c_n|^2\rangle$")
    ax.margins(x=0.06)


def build_fig01(root: str):
    """N=1 resonant bath: mean energy with the exact reference on top,
    plus a position-trace inset showing the collapse/revival envelope."""
    _, obs = run_table(root, "revival", "observables.csv",
                       require=("t", "energy", "position"))
    fig, ax = plt.subplots()
    ax.plot(obs["t"], obs["energy"], color="C0", label="trajectory average")
    oracle = os.path.join(root, "revival", "oracle.csv")
    exact = None
    if os.path.isfile(oracle):
        _, exact = read_table(oracle, require=("t", "energy", "position"))
        ax.plot(exact["t"], exact["energy"], color="k", ls="--", lw=0.9,
                label="exact reference")
    ax.set_xlabel("t")
    ax.set_ylabel("average energy")
    ax.legend(loc="best")
    inset = ax.inset_axes([0.56, 0.12, 0.40, 0.34])
    inset.plot(obs["t"], obs["position"], color="C0", lw=0.5)
    if exact is not None:
        inset.plot(exact["t"], exact["position"], color="k", ls="--", lw=0.5)
    inset.set_ylabel(r"$\langle q\rangle$", fontsize=7)
    inset.tick_params(labelsize=6)
    return fig


def build_fig02(root: str):
    """Per-level energies for the N=1 run; the level index labels each curve."""
    fig, ax = plt.subplots()
    _level_curves(ax, root, "revival", "levels.csv")
    return fig


def _decay_panel(root: str, run: str, label: str):
    _, obs = run_table(root, run, "observables.csv", require=("t", "energy"))
    fig, ax = plt.subplots()
    ax.plot(obs["t"], obs["energy"], color="C0", label=label)
    ax.set_yscale("log")
    _maybe_overlay_fits(ax, os.path.join(root, run, "fits.csv"))
    ax.set_xlabel("t")
    ax.set_ylabel("average energy")
    ax.legend(loc="best")
    return fig


def build_fig03(root: str):
    """N=10 energy decay on a semilog axis with the fitted exponential and
    power-law segments drawn through their windows."""
    return _decay_panel(root, os.path.join("ho", "N10"), "N = 10")


def build_fig04(root: str):
    """Per-level energies for N=10, where the initial level ordering inverts."""
    fig, ax = plt.subplots()
    _level_curves(ax, root, "ho", "N10", "levels.csv")
    return fig


def build_fig05(root: str):
    """N=20 energy decay, semilog, with the three fitted regimes overlaid."""
    return _decay_panel(root, os.path.join("ho", "N20"), "N = 20")


def build_fig06(root: str):
    """Energy decay for the whole harmonic sweep on one semilog axis."""
    fig, ax = plt.subplots()
    for i, n in enumerate(HO_SWEEP_NS):
        run = os.path.join("ho", f"N{n}")
        _, obs = run_table(root, run, "observables.csv",
                           require=("t", "energy"))
        ax.plot(obs["t"], obs["energy"], color=f"C{i}", label=f"N = {n}")
        _maybe_overlay_fits(ax, os.path.join(root, run, "fits.csv"))
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("average energy")
    ax.legend(loc="best", ncols=2)
    return fig


def build_fig07(root: str):
    """Purity for the harmonic sweep with the 1/15 mixed-state floor marked."""
    fig, ax = plt.subplots()
    for i, n in enumerate(HO_SWEEP_NS):
        _, obs = run_table(root, "ho", f"N{n}", "observables.csv",
                           require=("t", "purity_normalized"))
        ax.plot(obs["t"], obs["purity_normalized"], color=f"C{i}",
                label=f"N = {n}")
    ax.axhline(PURITY_FLOOR, color="k", ls=(0, (8, 4)), lw=0.9,
               label=f"1/15 = {PURITY_FLOOR:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("purity")
    ax.legend(loc="best", ncols=2)
    return fig


def build_fig08(root: str):
    """Phase-space portraits of a single trajectory, one panel per bath
    size, bath growing left to right and top to bottom."""
    fig, axes = plt.subplots(2, 4, figsize=(10.0, 5.2))
    for ax, n in zip(axes.flat, PHASE_NS):
        _, ph = run_table(root, "ho", f"N{n}", "phase.csv",
                          require=("t", "q", "p"))
        ax.plot(ph["q"], ph["p"], lw=0.35, color="C0")
        ax.set_title(f"N = {n}")
        ax.tick_params(labelsize=7)
    for ax in axes[1]:
        ax.set_xlabel(r"$\langle q\rangle$")
    for ax in axes[:, 0]:
        ax.set_ylabel(r"$\langle p\rangle$")
    fig.tight_layout()
    return fig


def _scaling_points(root: str, sweep: str, column: str):
    """Collect (s -> (n, value)) groups from a sweep's exponents.csv."""
    _, tab = run_table(root, sweep, "exponents.csv",
                       require=("n", "s", column))
    groups: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for s in sorted(set(float(v) for v in tab["s"])):
        mask = (tab["s"] == s) & (tab["n"] >= 1) & np.isfinite(tab[column])
        mask &= tab[column] > 0
        groups[s] = (tab["n"][mask], tab[column][mask])
    return groups


def build_fig09(root: str):
    """Exponential decay rate against bath size for the three bath types,
    log-log, with the fitted small-N and large-N power laws drawn in."""
    fig, ax = plt.subplots()
    markers = {0.1: "s", 1.0: "o", 1.9: "^"}
    for s, (n, alpha) in _scaling_points(root, "ho_types", "alpha").items():
        ax.plot(n, alpha, ls="", marker=markers.get(s, "d"), ms=4.5,
                label=f"s = {s:g}")
    path = os.path.join(root, "ho_types", "scaling_fits.csv")
    if os.path.isfile(path):
        _, fits = read_table(path, require=("s", "model", "n_lo", "n_hi",
                                            "exponent", "prefactor"))
        rows = [i for i in range(len(fits["s"]))
                if str(fits["model"][i]) == "two_power_laws"]
        # one guide per segment; the ohmic fit stands in for all three types
        want = 1.0 if any(fits["s"][i] == 1.0 for i in rows) else None
        for i in rows:
            if want is not None and fits["s"][i] != want:
                continue
            n = np.geomspace(max(fits["n_lo"][i], 1.0), fits["n_hi"][i], 100)
            y = fits["prefactor"][i] * n ** fits["exponent"][i]
            ax.plot(n, y, color="0.15", ls="--", lw=1.0,
                    label=rf"$\propto N^{{{fits['exponent'][i]:.3f}}}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel(r"decay rate $\alpha$")
    ax.legend(loc="best")
    return fig


def build_fig10(root: str):
    """Late-time power-law exponent against bath size, log-log, all types."""
    fig, ax = plt.subplots()
    markers = {0.1: "s", 1.0: "o", 1.9: "^"}
    for s, (n, beta) in _scaling_points(root, "ho_types", "beta").items():
        ax.plot(n, beta, ls="", marker=markers.get(s, "d"), ms=4.5,
                label=f"s = {s:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel(r"power-law exponent $\beta$")
    ax.legend(loc="best")
    return fig


def build_fig11(root: str):
    """Anharmonic well with every bound level drawn between its classical
    turning points; the initially populated band is solid, the rest dotted."""
    _, pot = run_table(root, "morse_spectrum", "potential.csv",
                       require=("r", "v"))
    _, spec = run_table(root, "morse_spectrum", "spectrum.csv",
                        require=("n", "energy"))
    fig, ax = plt.subplots()
    r, v = pot["r"], pot["v"]
    ax.plot(r, v, color="k", lw=1.8)
    lo, hi = PACKET_WINDOW
    for n, e in zip(spec["n"].astype(int), spec["energy"]):
        inside = np.nonzero(v <= e)[0]
        if inside.size == 0:
            continue
        solid = lo <= n <= hi
        ax.hlines(e, r[inside[0]], r[inside[-1]],
                  color="C0" if solid else "0.45",
                  ls="-" if solid else ":",
                  lw=1.0 if solid else 0.7)
    top = float(spec["energy"].max())
    ax.set_ylim(0.0, 1.15 * top)
    ax.set_xlim(r[0], r[-1])
    ax.set_xlabel("r")
    ax.set_ylabel("energy")
    return fig


def build_fig12(root: str):
    """Energy decay in the anharmonic well for growing bath sizes, semilog."""
    fig, ax = plt.subplots()
    for i, n in enumerate(MORSE_NS):
        _, obs = run_table(root, "morse", f"N{n}", "observables.csv",
                           require=("t", "energy"))
        ax.plot(obs["t"], obs["energy"], color=f"C{i}", label=f"N = {n}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("average energy")
    ax.legend(loc="best")
    return fig


def build_fig13(root: str):
    """Anharmonic decay rate against bath size, log-log, with the fitted
    quadratic drawn through the measured points."""
    fig, ax = plt.subplots()
    groups = _scaling_points(root, "morse", "alpha")
    for s, (n, alpha) in groups.items():
        ax.plot(n, alpha, ls="", marker="o", ms=4.5, label="measured")
    path = os.path.join(root, "morse", "scaling_fits.csv")
    if os.path.isfile(path):
        _, fits = read_table(path, require=("model", "n_lo", "n_hi",
                                            "coeff_a", "coeff_b", "coeff_c"))
        for i in range(len(fits["model"])):
            if str(fits["model"][i]) != "quadratic":
                continue
            n = np.geomspace(max(fits["n_lo"][i], 1.0), fits["n_hi"][i], 200)
            y = (fits["coeff_a"][i] * n ** 2 + fits["coeff_b"][i] * n
                 + fits["coeff_c"][i])
            ax.plot(n[y > 0], y[y > 0], color="0.15", ls="--", lw=1.0,
                    label="quadratic fit")
            break
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel(r"decay rate $\alpha$")
    ax.legend(loc="best")
    return fig


FIGURES: dict[str, tuple] = {
    "fig01": (build_fig01, "fig01_revival.png"),
    "fig02": (build_fig02, "fig02_levels_single.png"),
    "fig03": (build_fig03, "fig03_two_regime.png"),
    "fig04": (build_fig04, "fig04_levels_inversion.png"),
    "fig05": (build_fig05, "fig05_three_regime.png"),
    "fig06": (build_fig06, "fig06_energy_summary.png"),
    "fig07": (build_fig07, "fig07_purity.png"),
    "fig08": (build_fig08, "fig08_phase_grid.png"),
    "fig09": (build_fig09, "fig09_alpha_scaling.png"),
    "fig10": (build_fig10, "fig10_beta_scaling.png"),
    "fig11": (build_fig11, "fig11_well_levels.png"),
    "fig12": (build_fig12, "fig12_morse_decay.png"),
    "fig13": (build_fig13, "fig13_morse_alpha.png"),
}


def build(name: str, input_dir: str):
    """Build one figure by registry name and return the Figure object."""
    if name not in FIGURES:
        raise SchemaError(f"unknown figure '{name}'"
                          f" (have {', '.join(sorted(FIGURES))})")
    builder, _ = FIGURES[name]
    return builder(input_dir)

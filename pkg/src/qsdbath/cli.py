"""Experiment orchestration: config files, single runs, N/s sweeps, decay
fits, the exact-reference oracle, and CSV emission.

Config files are ini-style: `[section]` headers with `key = value` lines,
`#` comments, and dotted keys (`system.kind = harmonic`) allowed anywhere.
Every value has a default keyed off the potential kind, so an empty file is
a complete harmonic-oscillator experiment.  All outputs are plain CSV with a
`# qsdbath-csv v1 <name>` schema line; floats are written with %.17g so
reruns of the same config are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .bath import BathSpec, NoiseRealization, make_bath
from .dynamics import (InitialState, InitialStateKind, IntegratorConfig,
                       NormalizationPolicy, exact_small_bath_reference,
                       initial_state, integrate_trajectory)
from .ensemble import (EnsembleConfig, ObservableSeries, ReducedDensity,
                       phase_series, run_ensemble)
from .errors import (ConfigError, ConvergenceError, FitDomainError,
                     NumericalInstabilityError, QsdError, SpectrumError)
from .fitting import (FitModel, RegimeSegmentation, ScalingModel,
                      detect_regimes, fit_exponent_scaling, fit_exponential,
                      fit_powerlaw)
from .spectra import (GridSpec, PotentialKind, SystemSpectrum, ho_spectrum,
                      morse_eigensolve, morse_potential)

log = logging.getLogger(__name__)

SCHEMA = "qsdbath-csv v1"
THREADS_ENV = "QSDBATH_THREADS"


@dataclass(frozen=True)
class SystemConfig:
    kind: PotentialKind = PotentialKind.HARMONIC
    mass: float = 1.0
    omega: float = 1.0
    d_e: float = 30.0
    a: float = 0.08
    r_e: float = 0.0
    n_max: int = 15  # 0 means every bound level the solver finds
    grid_r_min: float = -10.0
    grid_r_max: float = 10.0
    grid_step: float = 1e-3
    initial: InitialStateKind = InitialStateKind.UNIFORM_ENTANGLED
    packet_center: float = 16.0
    packet_sigma: float = 3.0
    packet_window: tuple[int, int] = (9, 23)


@dataclass(frozen=True)
class BathConfig:
    n: int = 10
    spectral_exponent: float = 1.0
    omega_min: float = 1.1
    omega_max: float = 2.1
    g: float = 0.01
    frequency_seed: int = 7
    frequency_override: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple[int, ...] = ()
    s_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = SystemConfig()
    bath: BathConfig = BathConfig()
    integrator: IntegratorConfig = IntegratorConfig()
    ensemble: EnsembleConfig = EnsembleConfig()
    sweep: SweepConfig = SweepConfig()
    output_dir: str = "qsdbath_out"
    n_realizations_explicit: bool = field(default=False, compare=False)


# ---------------------------------------------------------------- parsing

def _cast_float(s: str) -> float:
    return float(s)


def _cast_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected integer, got {s}")
    return int(v)


def _cast_kind(s: str) -> PotentialKind:
    try:
        return PotentialKind(s.strip().lower())
    except ValueError:
        raise ValueError(f"unknown potential kind {s!r}") from None


def _cast_initial(s: str) -> InitialStateKind:
    names = {"uniform": InitialStateKind.UNIFORM_ENTANGLED,
             "uniform_entangled": InitialStateKind.UNIFORM_ENTANGLED,
             "gaussian": InitialStateKind.GAUSSIAN_PACKET,
             "gaussian_packet": InitialStateKind.GAUSSIAN_PACKET}
    if s.strip().lower() not in names:
        raise ValueError(f"unknown initial state {s!r}")
    return names[s.strip().lower()]


def _cast_policy(s: str) -> NormalizationPolicy:
    try:
        return NormalizationPolicy(s.strip().lower())
    except ValueError:
        raise ValueError(f"unknown normalization policy {s!r}") from None


def _cast_int_pair(s: str) -> tuple[int, int]:
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"expected two integers, got {s!r}")
    return _cast_int(parts[0]), _cast_int(parts[1])


def _cast_int_list(s: str) -> tuple[int, ...]:
    return tuple(_cast_int(p) for p in s.replace(",", " ").split() if p)


def _cast_float_list(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.replace(",", " ").split() if p)


def _cast_str(s: str) -> str:
    return s


# (section, key) -> caster; None default means "resolved later"
_KEYS: dict[tuple[str, str], object] = {
    ("system", "kind"): _cast_kind,
    ("system", "mass"): _cast_float,
    ("system", "omega"): _cast_float,
    ("system", "d_e"): _cast_float,
    ("system", "a"): _cast_float,
    ("system", "r_e"): _cast_float,
    ("system", "n_max"): _cast_int,
    ("system", "grid_r_min"): _cast_float,
    ("system", "grid_r_max"): _cast_float,
    ("system", "grid_step"): _cast_float,
    ("system", "initial"): _cast_initial,
    ("system", "packet_center"): _cast_float,
    ("system", "packet_sigma"): _cast_float,
    ("system", "packet_window"): _cast_int_pair,
    ("bath", "n"): _cast_int,
    ("bath", "spectral_exponent"): _cast_float,
    ("bath", "omega_min"): _cast_float,
    ("bath", "omega_max"): _cast_float,
    ("bath", "g"): _cast_float,
    ("bath", "frequency_seed"): _cast_int,
    ("bath", "frequency_override"): _cast_float_list,
    ("integrator", "dt"): _cast_float,
    ("integrator", "t_max"): _cast_float,
    ("integrator", "sample_stride"): _cast_int,
    ("integrator", "normalization"): _cast_policy,
    ("ensemble", "n_realizations"): _cast_int,
    ("ensemble", "master_seed"): _cast_int,
    ("ensemble", "parallel_degree"): _cast_int,
    ("sweep", "n_values"): _cast_int_list,
    ("sweep", "s_values"): _cast_float_list,
    ("output", "dir"): _cast_str,
}

# per-kind defaults for keys whose natural value differs between potentials
_KIND_DEFAULTS = {
    PotentialKind.HARMONIC: {
        ("system", "n_max"): 15,
        ("system", "grid_r_min"): -10.0,
        ("system", "grid_r_max"): 10.0,
        ("system", "initial"): InitialStateKind.UNIFORM_ENTANGLED,
        ("bath", "g"): 0.01,
    },
    PotentialKind.MORSE: {
        ("system", "n_max"): 0,
        ("system", "grid_r_min"): -7.4,
        ("system", "grid_r_max"): 20.0,
        ("system", "initial"): InitialStateKind.GAUSSIAN_PACKET,
        ("bath", "g"): 0.001,
    },
}


def _raw_entries(text: str) -> dict[tuple[str, str], tuple[str, int]]:
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if "." in key:
            sec, key = key.split(".", 1)
            sec = sec.strip().lower()
        else:
            sec = section
        key = key.strip().lower()
        if not sec:
            raise ConfigError(f"line {lineno}: key {key!r} outside any section")
        if (sec, key) in entries:
            raise ConfigError(f"line {lineno}: duplicate key {sec}.{key}")
        entries[(sec, key)] = (value, lineno)
    return entries


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text into a validated ExperimentConfig with kind-specific
    defaults filled in.  Diagnostics carry the offending line number."""
    entries = _raw_entries(text)
    for (sec, key), (_, lineno) in entries.items():
        if (sec, key) not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {sec}.{key}")

    def get(sec: str, key: str, default):
        if (sec, key) not in entries:
            return default
        value, lineno = entries[(sec, key)]
        try:
            return _KEYS[(sec, key)](value)
        except ValueError as e:
            raise ConfigError(f"line {lineno}: {sec}.{key}: {e}") from None

    def lineof(sec: str, key: str) -> str:
        if (sec, key) in entries:
            return f"line {entries[(sec, key)][1]}: "
        return ""

    kind = get("system", "kind", PotentialKind.HARMONIC)
    kd = _KIND_DEFAULTS[kind]

    def kget(sec: str, key: str, base):
        return get(sec, key, kd.get((sec, key), base))

    system = SystemConfig(
        kind=kind,
        mass=get("system", "mass", 1.0),
        omega=get("system", "omega", 1.0),
        d_e=get("system", "d_e", 30.0),
        a=get("system", "a", 0.08),
        r_e=get("system", "r_e", 0.0),
        n_max=kget("system", "n_max", 15),
        grid_r_min=kget("system", "grid_r_min", -10.0),
        grid_r_max=kget("system", "grid_r_max", 10.0),
        grid_step=get("system", "grid_step", 1e-3),
        initial=kget("system", "initial", InitialStateKind.UNIFORM_ENTANGLED),
        packet_center=get("system", "packet_center", 16.0),
        packet_sigma=get("system", "packet_sigma", 3.0),
        packet_window=get("system", "packet_window", (9, 23)),
    )
    if system.n_max < 0:
        raise ConfigError(lineof("system", "n_max") + "n_max must be >= 0")
    if system.kind is PotentialKind.HARMONIC and system.n_max == 0:
        raise ConfigError(lineof("system", "n_max")
                          + "n_max = 0 (all levels) only makes sense for morse")

    s_exp = get("bath", "spectral_exponent", 1.0)
    if not 0.0 <= s_exp <= 2.0:
        raise ConfigError(lineof("bath", "spectral_exponent")
                          + f"spectral_exponent must lie in [0, 2], got {s_exp}")
    override = get("bath", "frequency_override", None)
    bath = BathConfig(
        n=get("bath", "n", 10),
        spectral_exponent=s_exp,
        omega_min=get("bath", "omega_min", 1.1),
        omega_max=get("bath", "omega_max", 2.1),
        g=kget("bath", "g", 0.01),
        frequency_seed=get("bath", "frequency_seed", 7),
        frequency_override=override,
    )
    if bath.n < 0:
        raise ConfigError(lineof("bath", "n") + "bath size must be >= 0")
    if bath.g <= 0:
        raise ConfigError(lineof("bath", "g") + "coupling must be positive")
    if override is not None and len(override) != bath.n:
        raise ConfigError(lineof("bath", "frequency_override")
                          + f"{len(override)} override frequencies for n={bath.n}")

    try:
        integrator = IntegratorConfig(
            dt=get("integrator", "dt", 0.01),
            t_max=get("integrator", "t_max", 500.0),
            sample_stride=get("integrator", "sample_stride", 10),
            normalization_policy=get("integrator", "normalization",
                                     NormalizationPolicy.RAW),
        )
    except ConfigError as e:
        raise ConfigError(f"integrator section: {e}") from None

    explicit = ("ensemble", "n_realizations") in entries
    n_real = get("ensemble", "n_realizations", None)
    if n_real is None:
        # heavy Morse N=100 runs average fewer realizations by default
        n_real = 200 if (kind is PotentialKind.MORSE and bath.n >= 100) else 500
    try:
        ensemble = EnsembleConfig(
            n_realizations=n_real,
            master_seed=get("ensemble", "master_seed", 1234),
            parallel_degree=get("ensemble", "parallel_degree", 0),
        )
    except ConfigError as e:
        raise ConfigError(f"ensemble section: {e}") from None

    sweep = SweepConfig(n_values=get("sweep", "n_values", ()),
                        s_values=get("sweep", "s_values", ()))
    for s in sweep.s_values:
        if not 0.0 <= s <= 2.0:
            raise ConfigError(lineof("sweep", "s_values")
                              + f"sweep s={s} outside [0, 2]")

    cfg = ExperimentConfig(system=system, bath=bath, integrator=integrator,
                           ensemble=ensemble, sweep=sweep,
                           output_dir=get("output", "dir", "qsdbath_out"),
                           n_realizations_explicit=explicit)
    _check_consistency(cfg)
    return cfg


def _check_consistency(cfg: ExperimentConfig) -> None:
    sy = cfg.system
    if sy.initial is InitialStateKind.GAUSSIAN_PACKET and sy.n_max:
        lo, hi = sy.packet_window
        if not (1 <= lo <= hi <= sy.n_max):
            raise ConfigError(f"packet window [{lo}, {hi}] not within"
                              f" 1..{sy.n_max}")
    if cfg.bath.omega_min >= cfg.bath.omega_max:
        raise ConfigError("bath window requires omega_min < omega_max")


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (PotentialKind, InitialStateKind, NormalizationPolicy)):
        return v.value
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, tuple):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Inverse of parse_config: parse(serialize(cfg)) == cfg."""
    sy, ba, it, en, sw = cfg.system, cfg.bath, cfg.integrator, cfg.ensemble, \
        cfg.sweep
    lines = ["[system]"]
    for key in ("kind", "mass", "omega", "d_e", "a", "r_e", "n_max",
                "grid_r_min", "grid_r_max", "grid_step", "initial",
                "packet_center", "packet_sigma", "packet_window"):
        lines.append(f"{key} = {_fmt_value(getattr(sy, key))}")
    lines.append("")
    lines.append("[bath]")
    for key in ("n", "spectral_exponent", "omega_min", "omega_max", "g",
                "frequency_seed"):
        lines.append(f"{key} = {_fmt_value(getattr(ba, key))}")
    if ba.frequency_override is not None:
        lines.append(f"frequency_override = {_fmt_value(ba.frequency_override)}")
    lines.append("")
    lines.append("[integrator]")
    lines.append(f"dt = {_fmt_value(it.dt)}")
    lines.append(f"t_max = {_fmt_value(it.t_max)}")
    lines.append(f"sample_stride = {it.sample_stride}")
    lines.append(f"normalization = {it.normalization_policy.value}")
    lines.append("")
    lines.append("[ensemble]")
    lines.append(f"n_realizations = {en.n_realizations}")
    lines.append(f"master_seed = {en.master_seed}")
    lines.append(f"parallel_degree = {en.parallel_degree}")
    lines.append("")
    lines.append("[sweep]")
    if sw.n_values:
        lines.append(f"n_values = {_fmt_value(sw.n_values)}")
    if sw.s_values:
        lines.append(f"s_values = {_fmt_value(sw.s_values)}")
    lines.append("")
    lines.append("[output]")
    lines.append(f"dir = {cfg.output_dir}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- assembly

def build_spectrum(cfg: ExperimentConfig) -> SystemSpectrum:
    sy = cfg.system
    if sy.kind is PotentialKind.HARMONIC:
        return ho_spectrum(omega=sy.omega, mass=sy.mass, n_max=sy.n_max)
    spec = morse_potential(d_e=sy.d_e, a=sy.a, r_e=sy.r_e, mass=sy.mass,
                           grid=GridSpec(sy.grid_r_min, sy.grid_r_max,
                                         sy.grid_step))
    window = (1, sy.n_max) if sy.n_max else None
    return morse_eigensolve(spec, level_window=window)


def build_bath(cfg: ExperimentConfig) -> BathSpec:
    ba = cfg.bath
    freqs = np.array(ba.frequency_override) if ba.frequency_override else None
    return make_bath(ba.n, ba.spectral_exponent, ba.omega_min, ba.omega_max,
                     ba.g, ba.frequency_seed, frequencies=freqs)


def build_initial(cfg: ExperimentConfig, spectrum: SystemSpectrum) -> InitialState:
    sy = cfg.system
    return initial_state(sy.initial, spectrum.n_max, center=sy.packet_center,
                         sigma=sy.packet_sigma, window=sy.packet_window)


# ------------------------------------------------------------ CSV output

def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: str, name: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# {SCHEMA} {name}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt_cell(v) for v in row) + "\n")


def read_csv(path: str) -> tuple[str, dict[str, np.ndarray]]:
    """Read one of our CSVs; returns (schema name, column arrays).  Non-float
    columns come back as object arrays of strings."""
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
        if not first.startswith(f"# {SCHEMA} "):
            raise ConfigError(f"{path}: missing schema line")
        name = first.split(f"# {SCHEMA} ", 1)[1]
        header = f.readline().strip().split(",")
        raw = [line.strip().split(",") for line in f if line.strip()]
    cols: dict[str, np.ndarray] = {}
    for j, col in enumerate(header):
        vals = [r[j] for r in raw]
        try:
            cols[col] = np.array([float(v) for v in vals])
        except ValueError:
            cols[col] = np.array(vals, dtype=object)
    return name, cols


def _write_observables(path: str, name: str, series: ObservableSeries) -> None:
    rows = zip(series.times, series.energy, series.position, series.momentum,
               series.trace, series.purity, series.purity_normalized)
    write_csv(path, name,
              ["t", "energy", "position", "momentum", "trace", "purity",
               "purity_normalized"], rows)


def _write_levels(path: str, series: ObservableSeries) -> None:
    n_max, _ = series.level_energies.shape
    rows = ((t, n + 1, series.level_energies[n, k])
            for k, t in enumerate(series.times) for n in range(n_max))
    write_csv(path, "levels", ["t", "n", "level_energy"], rows)


def _write_rho(path: str, density: ReducedDensity) -> None:
    n = density.rho.shape[1]
    rows = ((t, i + 1, j + 1, density.rho[k, i, j].real,
             density.rho[k, i, j].imag)
            for k, t in enumerate(density.times)
            for i in range(n) for j in range(n))
    write_csv(path, "rho", ["t", "n", "m", "re", "im"], rows)


def _write_fits(path: str, segmentation: RegimeSegmentation) -> None:
    rows = [(i + 1, s.model.value, s.window[0], s.window[1], s.exponent,
             s.prefactor, s.sse)
            for i, s in enumerate(segmentation.segments)]
    write_csv(path, "fits",
              ["segment", "model", "t_lo", "t_hi", "exponent", "prefactor",
               "sse"], rows)


def _write_manifest(path: str, cfg: ExperimentConfig, bath: BathSpec,
                    spectrum: SystemSpectrum) -> None:
    import scipy

    rows = [
        ("package_version", __version__),
        ("numpy_version", np.__version__),
        ("scipy_version", scipy.__version__),
        ("potential", cfg.system.kind.value),
        ("provenance", spectrum.provenance.value),
        ("n_max", spectrum.n_max),
        ("initial_state", cfg.system.initial.value),
        ("bath_n", bath.n_oscillators),
        ("spectral_exponent", bath.s),
        ("omega_min", bath.omega_min),
        ("omega_max", bath.omega_max),
        ("g", bath.g),
        ("frequency_seed", bath.frequency_seed),
        ("frequencies", ";".join(f"{w:.17g}" for w in bath.frequencies)),
        ("master_seed", cfg.ensemble.master_seed),
        ("n_realizations", cfg.ensemble.n_realizations),
        ("dt", cfg.integrator.dt),
        ("t_max", cfg.integrator.t_max),
        ("sample_stride", cfg.integrator.sample_stride),
        ("normalization", cfg.integrator.normalization_policy.value),
    ]
    write_csv(path, "manifest", ["key", "value"], rows)


# ---------------------------------------------------------- subcommands

def _load_config(args) -> ExperimentConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
    cfg = parse_config(text)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    threads = getattr(args, "threads", None)
    if threads is None and os.environ.get(THREADS_ENV):
        threads = int(os.environ[THREADS_ENV])
    if threads is not None:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble,
                                            parallel_degree=threads))
    bath_over = {}
    if getattr(args, "n_bath", None) is not None:
        bath_over["n"] = args.n_bath
    if getattr(args, "spectral_exponent", None) is not None:
        bath_over["spectral_exponent"] = args.spectral_exponent
    if getattr(args, "omega_window", None):
        try:
            lo, hi = (float(p) for p in args.omega_window.split(","))
        except ValueError:
            raise ConfigError("--omega-window wants two comma-separated"
                              f" numbers, got {args.omega_window!r}") from None
        bath_over["omega_min"], bath_over["omega_max"] = lo, hi
    if getattr(args, "coupling", None) is not None:
        bath_over["g"] = args.coupling
    if getattr(args, "freq_seed", None) is not None:
        bath_over["frequency_seed"] = args.freq_seed
    if bath_over:
        cfg = replace(cfg, bath=replace(cfg.bath, **bath_over))
    if getattr(args, "freq_override", None):
        freqs = tuple(float(p) for p in args.freq_override.split(",") if p)
        cfg = replace(cfg, bath=replace(cfg.bath, frequency_override=freqs))
        if len(freqs) != cfg.bath.n:
            raise ConfigError(f"--freq-override gives {len(freqs)}"
                              f" frequencies for bath n={cfg.bath.n}")
    return cfg


def _run_one(cfg: ExperimentConfig, outdir: str, want_rho: bool) -> None:
    os.makedirs(outdir, exist_ok=True)
    spectrum = build_spectrum(cfg)
    bath = build_bath(cfg)
    init = build_initial(cfg, spectrum)
    series, density = run_ensemble(init, bath, spectrum, cfg.integrator,
                                   cfg.ensemble)
    _write_observables(os.path.join(outdir, "observables.csv"), "observables",
                       series)
    _write_levels(os.path.join(outdir, "levels.csv"), series)
    if want_rho:
        _write_rho(os.path.join(outdir, "rho.csv"), density)
    noise = NoiseRealization.draw(bath, cfg.ensemble.master_seed, 0)
    traj = integrate_trajectory(init, bath, spectrum, noise, cfg.integrator)
    times, qs, ps = phase_series(traj, spectrum)
    write_csv(os.path.join(outdir, "phase.csv"), "phase", ["t", "q", "p"],
              zip(times, qs, ps))
    try:
        seg = detect_regimes(series.times, series.energy, max_segments=3)
        _write_fits(os.path.join(outdir, "fits.csv"), seg)
    except FitDomainError as e:
        log.warning("%s: energy series not fittable: %s", outdir, e)
    _write_frequencies(os.path.join(outdir, "frequencies.csv"), bath)
    _write_manifest(os.path.join(outdir, "manifest.csv"), cfg, bath, spectrum)
    echo = replace(cfg, bath=replace(cfg.bath,
                                     frequency_override=tuple(bath.frequencies)))
    with open(os.path.join(outdir, "config_echo.cfg"), "w",
              encoding="utf-8") as f:
        f.write(serialize_config(echo))


def cmd_run(args) -> int:
    cfg = _load_config(args)
    _run_one(cfg, cfg.output_dir, args.rho)
    print(f"run complete: {cfg.output_dir}")
    return 0


def _sweep_dirname(n: int, s: float, multiple_s: bool) -> str:
    return f"N{n}_s{s:g}" if multiple_s else f"N{n}"


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    n_values = cfg.sweep.n_values or (cfg.bath.n,)
    s_values = cfg.sweep.s_values or (cfg.bath.spectral_exponent,)
    multiple_s = len(s_values) > 1
    exponent_rows = []
    alphas: dict[float, list[tuple[int, float]]] = {s: [] for s in s_values}
    for s in s_values:
        for n in n_values:
            sub = replace(
                cfg,
                bath=replace(cfg.bath, n=n, spectral_exponent=s,
                             frequency_override=None),
                sweep=SweepConfig(),
            )
            if not cfg.n_realizations_explicit:
                auto = 200 if (cfg.system.kind is PotentialKind.MORSE
                               and n >= 100) else 500
                sub = replace(sub, ensemble=replace(sub.ensemble,
                                                    n_realizations=auto))
            outdir = os.path.join(cfg.output_dir,
                                  _sweep_dirname(n, s, multiple_s))
            log.info("sweep: N=%d s=%g -> %s", n, s, outdir)
            _run_one(sub, outdir, want_rho=False)
            row = _extract_exponents(outdir)
            exponent_rows.append((n, s) + row)
            if not np.isnan(row[0]):
                alphas[s].append((n, row[0]))
    os.makedirs(cfg.output_dir, exist_ok=True)
    write_csv(os.path.join(cfg.output_dir, "exponents.csv"), "exponents",
              ["n", "s", "alpha", "beta", "t_break", "multi_regime"],
              exponent_rows)
    _write_scaling(cfg, alphas)
    print(f"sweep complete: {cfg.output_dir}")
    return 0


def _extract_exponents(outdir: str) -> tuple[float, float, float, bool]:
    """(alpha, beta, first breakpoint, multi) from a run's fits.csv; nan for
    laws that are absent."""
    path = os.path.join(outdir, "fits.csv")
    if not os.path.exists(path):
        return (np.nan, np.nan, np.nan, False)
    _, cols = read_csv(path)
    alpha = beta = t_break = np.nan
    for model, exponent, t_lo in zip(cols["model"], cols["exponent"],
                                     cols["t_lo"]):
        if model == FitModel.EXPONENTIAL.value and np.isnan(alpha):
            alpha = exponent
        if model == FitModel.POWER_LAW.value:
            beta = exponent
            if np.isnan(t_break):
                t_break = t_lo
    return (alpha, beta, t_break, len(cols["model"]) > 1)


def _write_scaling(cfg: ExperimentConfig, alphas) -> None:
    rows = []
    model = ScalingModel.QUADRATIC if cfg.system.kind is PotentialKind.MORSE \
        else ScalingModel.TWO_POWER_LAWS
    for s, points in alphas.items():
        if len(points) < 4:
            log.info("s=%g: %d alpha points, skipping scaling fit",
                     s, len(points))
            continue
        ns = np.array([p[0] for p in points], dtype=float)
        vals = np.array([p[1] for p in points])
        try:
            fits = fit_exponent_scaling(ns, vals, model)
        except FitDomainError as e:
            log.warning("s=%g: scaling fit failed: %s", s, e)
            continue
        for i, r in enumerate(fits):
            coeffs = r.coefficients or (np.nan, np.nan, np.nan)
            rows.append((s, model.value, i + 1, r.window[0], r.window[1],
                         r.exponent, r.prefactor, r.sse) + tuple(coeffs))
    if rows:
        write_csv(os.path.join(cfg.output_dir, "scaling_fits.csv"),
                  "scaling_fits",
                  ["s", "model", "segment", "n_lo", "n_hi", "exponent",
                   "prefactor", "sse", "coeff_a", "coeff_b", "coeff_c"],
                  rows)


def _write_frequencies(path: str, bath: BathSpec) -> None:
    write_csv(path, "frequencies", ["lambda", "omega"],
              ((i + 1, w) for i, w in enumerate(bath.frequencies)))


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    spectrum = build_spectrum(cfg)
    write_csv(os.path.join(outdir, "spectrum.csv"), "spectrum",
              ["n", "energy"],
              ((n + 1, e) for n, e in enumerate(spectrum.energies)))
    _write_frequencies(os.path.join(outdir, "frequencies.csv"),
                       build_bath(cfg))
    if args.elements:
        p = spectrum.p_matrix
        rows = ((i + 1, j + 1, spectrum.q_matrix[i, j],
                 p[i, j].real if p is not None else np.nan,
                 p[i, j].imag if p is not None else np.nan)
                for i in range(spectrum.n_max) for j in range(spectrum.n_max))
        write_csv(os.path.join(outdir, "elements.csv"), "elements",
                  ["n", "m", "q", "p_re", "p_im"], rows)
    if cfg.system.kind is PotentialKind.MORSE:
        sy = cfg.system
        spec = morse_potential(d_e=sy.d_e, a=sy.a, r_e=sy.r_e, mass=sy.mass,
                               grid=GridSpec(sy.grid_r_min, sy.grid_r_max,
                                             sy.grid_step))
        r = spec.grid.points()[::args.potential_stride]
        write_csv(os.path.join(outdir, "potential.csv"), "potential",
                  ["r", "v"], zip(r, spec.value(r)))
    print(f"spectrum written: {outdir} ({spectrum.n_max} levels)")
    return 0


def cmd_oracle(args) -> int:
    cfg = _load_config(args)
    if cfg.bath.n > 2:
        raise ConfigError("oracle requires a bath of at most 2 oscillators")
    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    spectrum = build_spectrum(cfg)
    bath = build_bath(cfg)
    init = build_initial(cfg, spectrum)
    series = exact_small_bath_reference(init, bath, spectrum, args.fock_cut,
                                        cfg.integrator)
    _write_observables(os.path.join(outdir, "oracle.csv"), "oracle", series)
    print(f"oracle written: {outdir}")
    return 0


def cmd_fit(args) -> int:
    _, cols = read_csv(args.observables)
    if args.column not in cols:
        raise ConfigError(f"column {args.column!r} not in {args.observables}"
                          f" (have {', '.join(cols)})")
    times = cols["t"]
    values = cols[args.column]
    window = None
    if args.window:
        lo, hi = (float(p) for p in args.window.split(","))
        window = (lo, hi)
    if args.model == "exp":
        seg = RegimeSegmentation(breakpoints=np.array([]),
                                 segments=[fit_exponential(times, values,
                                                           window)],
                                 multi_regime=False)
    elif args.model == "pow":
        seg = RegimeSegmentation(breakpoints=np.array([]),
                                 segments=[fit_powerlaw(times, values,
                                                        window)],
                                 multi_regime=False)
    else:
        if window is not None:
            mask = (times >= window[0]) & (times <= window[1])
            times, values = times[mask], values[mask]
        seg = detect_regimes(times, values, max_segments=args.max_segments)
    os.makedirs(args.out or ".", exist_ok=True)
    _write_fits(os.path.join(args.out or ".", "fits.csv"), seg)
    for i, s in enumerate(seg.segments):
        print(f"segment {i + 1}: {s.model.value} exponent={s.exponent:.6g}"
              f" window=[{s.window[0]:.6g}, {s.window[1]:.6g}]"
              f" sse={s.sse:.3e}")
    return 0


# ---------------------------------------------------------------- driver

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdbath",
        description="Stochastic trajectory simulator for a system level"
                    " coupled to a finite discrete oscillator bath")
    parser.add_argument("--verbose", "-v", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", "-c", help="config file path")
        p.add_argument("--out", "-o", help="output directory (overrides"
                                           " [output] dir)")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (or {THREADS_ENV})")
        p.add_argument("--n-bath", type=int, default=None,
                       help="bath size, overriding [bath] n")
        p.add_argument("--spectral-exponent", type=float, default=None,
                       help="density exponent s, overriding [bath]"
                            " spectral_exponent")
        p.add_argument("--omega-window", metavar="LO,HI",
                       help="frequency window, overriding [bath]"
                            " omega_min/omega_max")
        p.add_argument("--coupling", type=float, default=None,
                       help="coupling g, overriding [bath] g")
        p.add_argument("--freq-seed", type=int, default=None,
                       help="frequency draw seed, overriding [bath]"
                            " frequency_seed")
        p.add_argument("--freq-override",
                       help="comma-separated bath frequencies, pinning the"
                            " random draw")

    p = sub.add_parser("run", help="one ensemble run, full CSV outputs")
    common(p)
    p.add_argument("--rho", action="store_true",
                   help="also write the sampled density matrix (large)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid of runs over bath sizes and"
                                     " spectral exponents")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="eigenlevels and matrix elements")
    common(p)
    p.add_argument("--elements", action="store_true",
                   help="also write q/p matrix elements")
    p.add_argument("--potential-stride", type=int, default=10,
                   help="grid decimation for potential.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("oracle", help="exact small-bath reference (N <= 2)")
    common(p)
    p.add_argument("--fock-cut", type=int, default=12,
                   help="bath Fock-space truncation per oscillator")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fit", help="decay-law fits of an observables.csv"
                                   " column")
    p.add_argument("observables", help="path to observables.csv")
    p.add_argument("--column", default="energy",
                   choices=["energy", "purity", "purity_normalized"])
    p.add_argument("--model", default="auto", choices=["exp", "pow", "auto"])
    p.add_argument("--window", help="t_lo,t_hi")
    p.add_argument("--max-segments", type=int, default=2)
    p.add_argument("--out", "-o", help="directory for fits.csv")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else
        logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (NumericalInstabilityError, ConvergenceError, SpectrumError,
            FitDomainError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 3
    except QsdError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

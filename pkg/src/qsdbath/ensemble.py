"""Monte Carlo ensemble over noise realizations.

Trajectories run in fixed-size blocks of 128; blocks are distributed over a
thread pool and their partial density-matrix sums are reduced in block order,
so the result is bit-identical for any parallel degree.  Observables are all
derived from the accumulated M[c c*] at the sampled times.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, MemoryTable, NoiseRealization
from .dynamics import (InitialState, IntegratorConfig, NormalizationPolicy,
                       TrajectorySeries, _integrate_block)
from .errors import ConfigError
from .spectra import SystemSpectrum

log = logging.getLogger(__name__)

# realizations per lockstep block; fixed so the partition (and therefore the
# floating-point reduction order) never depends on the worker count
_BLOCK = 128


@dataclass(frozen=True)
class EnsembleConfig:
    n_realizations: int = 500
    master_seed: int = 1234
    parallel_degree: int = 0  # 0 means use os.cpu_count()

    def __post_init__(self) -> None:
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.parallel_degree < 0:
            raise ConfigError("parallel_degree must be >= 0")

    @property
    def workers(self) -> int:
        return self.parallel_degree or (os.cpu_count() or 1)


@dataclass(frozen=True)
class ObservableSeries:
    """Ensemble-averaged observables at the sampled times.  level_energies is
    eps_n * M[|c_n|^2] with shape (n_max, T)."""

    times: np.ndarray
    energy: np.ndarray
    position: np.ndarray
    momentum: np.ndarray
    level_energies: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    purity_normalized: np.ndarray


@dataclass(frozen=True)
class ReducedDensity:
    """M[c_n c_m*] at each sampled time; rho has shape (T, n_max, n_max)."""

    times: np.ndarray
    rho: np.ndarray


def observables_from_rhos(times: np.ndarray, rhos: np.ndarray,
                          spectrum: SystemSpectrum) -> ObservableSeries:
    """All scalar observables and level populations from a density series."""
    eps = spectrum.energies
    diag = np.einsum("tnn->tn", rhos).real
    energy = diag @ eps
    position = np.einsum("tnm,mn->t", rhos, spectrum.q_matrix).real
    if spectrum.p_matrix is not None:
        momentum = np.einsum("tnm,mn->t", rhos, spectrum.p_matrix).real
    else:
        momentum = np.full(len(times), np.nan)
    trace = diag.sum(axis=1)
    pur = np.einsum("tnm,tmn->t", rhos, rhos).real
    return ObservableSeries(times=times, energy=energy, position=position,
                            momentum=momentum,
                            level_energies=(diag * eps).T,
                            trace=trace, purity=pur,
                            purity_normalized=pur / trace**2)


def run_ensemble(init: InitialState, bath: BathSpec, spectrum: SystemSpectrum,
                 integrator_cfg: IntegratorConfig,
                 ensemble_cfg: EnsembleConfig
                 ) -> tuple[ObservableSeries, ReducedDensity]:
    """Average n_realizations independent trajectories; realization k draws
    its noise from (master_seed, k) so any subset is recomputable."""
    table = MemoryTable(bath, spectrum)
    n_real = ensemble_cfg.n_realizations
    starts = list(range(0, n_real, _BLOCK))

    def worker(first: int):
        count = min(_BLOCK, n_real - first)
        z = np.empty((bath.n_oscillators, count), dtype=complex)
        for j in range(count):
            z[:, j] = NoiseRealization.draw(
                bath, ensemble_cfg.master_seed, first + j).z_conj
        times, rho_sum, trace_block, _ = _integrate_block(
            init.amplitudes, z, bath, spectrum, table, integrator_cfg,
            first_index=first)
        return times, rho_sum, trace_block

    if ensemble_cfg.workers == 1 or len(starts) == 1:
        results = [worker(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=ensemble_cfg.workers) as pool:
            results = list(pool.map(worker, starts))

    times = results[0][0]
    rho_acc = results[0][1]
    for _, rho_sum, _ in results[1:]:
        rho_acc = rho_acc + rho_sum
    rhos = rho_acc / n_real
    raw_trace = np.mean(np.concatenate([r[2] for r in results], axis=1), axis=1)
    log.debug("ensemble of %d: max |mean raw trace - 1| = %.3e",
              n_real, float(np.max(np.abs(raw_trace - 1.0))))
    series = observables_from_rhos(times, rhos, spectrum)
    return series, ReducedDensity(times=times, rho=rhos)


def _policy_weight(c: np.ndarray, policy: NormalizationPolicy) -> float:
    if policy is NormalizationPolicy.TRACE_NORMALIZED:
        return float(np.sum(np.abs(c) ** 2))
    return 1.0


def energy_expectation(c: np.ndarray, spectrum: SystemSpectrum,
                       policy: NormalizationPolicy = NormalizationPolicy.RAW
                       ) -> float:
    """sum_n |c_n|^2 eps_n, divided by sum |c_n|^2 under TraceNormalized."""
    w = np.abs(c) ** 2
    return float(w @ spectrum.energies / _policy_weight(c, policy))


def position_expectation(c: np.ndarray, spectrum: SystemSpectrum,
                         policy: NormalizationPolicy = NormalizationPolicy.RAW
                         ) -> float:
    """sum_nm c_n* c_m q_nm; real up to rounding since q is real symmetric."""
    return float((np.conj(c) @ (spectrum.q_matrix @ c)).real
                 / _policy_weight(c, policy))


def momentum_expectation(c: np.ndarray, spectrum: SystemSpectrum,
                         policy: NormalizationPolicy = NormalizationPolicy.RAW
                         ) -> float:
    if spectrum.p_matrix is None:
        raise ConfigError("spectrum carries no momentum matrix")
    return float((np.conj(c) @ (spectrum.p_matrix @ c)).real
                 / _policy_weight(c, policy))


def purity(density: ReducedDensity, k: int) -> float:
    """P = sum_nm rho_nm rho_mn at sampled-time index k."""
    r = density.rho[k]
    return float(np.einsum("nm,mn->", r, r).real)


def level_energy_series(density: ReducedDensity,
                        spectrum: SystemSpectrum) -> np.ndarray:
    """eps_n * M[|c_n(t)|^2] as an (n_max, T) matrix (level-inversion view)."""
    diag = np.einsum("tnn->tn", density.rho).real
    return (diag * spectrum.energies).T


def phase_series(series: TrajectorySeries, spectrum: SystemSpectrum
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-realization phase portrait: (times, <q>(t), <p>(t))."""
    if spectrum.p_matrix is None:
        raise ConfigError("spectrum carries no momentum matrix")
    c = series.states
    q = np.einsum("tn,nm,tm->t", np.conj(c), spectrum.q_matrix, c).real
    p = np.einsum("tn,nm,tm->t", np.conj(c), spectrum.p_matrix, c).real
    return series.times, q, p

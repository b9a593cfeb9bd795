"""Single-trajectory integration of the linear stochastic coefficient equation

    hbar dc_n/dt = -i eps_n c_n - i A(t) (q^2 c)_n + z*_t (q c)_n - (q Obar(t) c)_n

plus an exact product-basis reference solver for small baths.

The integrator works in the interaction picture a_n = exp(+i eps_n t) c_n, so
a free system (N=0) is propagated exactly and the stiff diagonal phase does
not limit the step size.  The remaining rotated right-hand side is advanced
with classic fourth-order Runge-Kutta, evaluating A, z*, Obar at the exact
substep times.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bath import BathSpec, MemoryTable, NoiseRealization, counterterm_A, noise_value
from .errors import ConfigError, ConvergenceError, NumericalInstabilityError
from .spectra import SystemSpectrum

log = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e6


class InitialStateKind(Enum):
    UNIFORM_ENTANGLED = "uniform_entangled"
    GAUSSIAN_PACKET = "gaussian_packet"


class NormalizationPolicy(Enum):
    RAW = "raw"
    TRACE_NORMALIZED = "trace_normalized"


@dataclass(frozen=True)
class InitialState:
    """Normalized coefficient vector at t=0; build via initial_state()."""

    kind: InitialStateKind
    n_max: int
    amplitudes: np.ndarray
    center: float = 16.0
    sigma: float = 3.0
    window: tuple[int, int] = (9, 23)

    def __post_init__(self) -> None:
        if len(self.amplitudes) != self.n_max:
            raise ConfigError("amplitude vector length does not match n_max")
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError(f"initial state not normalized: sum |c|^2 = {norm}")


def initial_state(kind: InitialStateKind, n_max: int, center: float = 16.0,
                  sigma: float = 3.0,
                  window: tuple[int, int] = (9, 23)) -> InitialState:
    """Construct the uniform fully entangled state c_n = 1/sqrt(n_max), or a
    real Gaussian packet c_n proportional to exp(-(n-center)^2/sigma^2)
    restricted to a 1-based inclusive level window and normalized."""
    if kind is InitialStateKind.UNIFORM_ENTANGLED:
        amps = np.full(n_max, 1.0 / np.sqrt(n_max), dtype=complex)
    else:
        lo, hi = window
        if lo > hi:
            raise ConfigError(f"empty level window [{lo}, {hi}]")
        if lo < 1 or hi > n_max:
            raise ConfigError(f"level window [{lo}, {hi}] outside 1..{n_max}")
        n = np.arange(1, n_max + 1, dtype=float)
        amps = np.where((n >= lo) & (n <= hi),
                        np.exp(-((n - center) ** 2) / sigma**2), 0.0)
        amps = amps.astype(complex) / np.sqrt(np.sum(amps**2))
    return InitialState(kind=kind, n_max=n_max, amplitudes=amps,
                        center=center, sigma=sigma, window=window)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    t_max: float = 500.0
    sample_stride: int = 10
    normalization_policy: NormalizationPolicy = NormalizationPolicy.RAW

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        steps = self.t_max / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"t_max={self.t_max} is not an integer number of"
                              f" dt={self.dt} steps")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)


@dataclass(frozen=True)
class TrajectoryState:
    """Coefficient vector at one instant."""

    t: float
    c: np.ndarray


@dataclass(frozen=True)
class TrajectorySeries:
    """Sampled trajectory. states[k] is c(times[k]) after the normalization
    policy; trace[k] is the raw pre-policy sum |c_n|^2 (the linear equation
    does not preserve it)."""

    times: np.ndarray
    states: np.ndarray  # (T, n_max) complex
    trace: np.ndarray
    policy: NormalizationPolicy


def derivative(state: TrajectoryState, bath: BathSpec, spectrum: SystemSpectrum,
               noise: NoiseRealization, t: float,
               table: MemoryTable | None = None) -> np.ndarray:
    """Right-hand side dc/dt at time t (the explicit t argument is used, not
    state.t).  Reference implementation; the block integrator inlines the
    same contractions."""
    if len(state.c) != spectrum.n_max:
        raise ConfigError("state length does not match spectrum")
    if table is None:
        table = MemoryTable(bath, spectrum)
    q = spectrum.q_matrix
    c = state.c
    zt = noise_value(noise, bath, t)
    return (-1j * spectrum.energies * c
            - 1j * counterterm_A(bath, t) * (q @ (q @ c))
            + zt * (q @ c)
            - q @ (table.obar_matrix(t) @ c))


def _integrate_block(c0: np.ndarray, z_conj: np.ndarray, bath: BathSpec,
                     spectrum: SystemSpectrum, table: MemoryTable,
                     cfg: IntegratorConfig, first_index: int,
                     collect_states: bool = False):
    """Propagate a block of trajectories in lockstep.

    z_conj has shape (N, B); all B trajectories share c0 and the bath but see
    different noise.  Returns (sample_times, rho_sum, trace_block, states)
    where rho_sum[k] accumulates sum_b outer(c_b, c_b*) at sample k over the
    block (after the normalization policy), trace_block[k, b] is the raw
    pre-policy norm, and states is the policy-applied (T, n, B) coefficient
    array when collect_states is set, else None.
    """
    n = len(c0)
    n_b = z_conj.shape[1]
    eps = spectrum.energies
    q = spectrum.q_matrix
    q2 = q @ q
    w = bath.frequencies
    g = bath.g
    dt = cfg.dt
    n_steps = cfg.n_steps
    stride = cfg.sample_stride
    sample_steps = range(0, n_steps + 1, stride)
    n_samples = len(sample_steps)
    times = dt * np.arange(0, n_steps + 1, stride, dtype=float)

    def coeffs(t: float):
        # block-shared memory matrix and counterterm, per-member noise row
        qg = q @ table.obar_matrix(t)
        a_t = counterterm_A(bath, t)
        z_row = -1j * g * (np.exp(1j * w * t) @ z_conj) if w.size else \
            np.zeros(n_b, dtype=complex)
        v = np.exp(1j * eps * t)
        return qg, a_t, z_row, v

    def rhs(a_mat: np.ndarray, co) -> np.ndarray:
        qg, a_t, z_row, v = co
        b = np.conj(v)[:, None] * a_mat
        r = (-1j * a_t) * (q2 @ b) + (q @ b) * z_row[None, :] - qg @ b
        return v[:, None] * r

    a = np.repeat(c0[:, None], n_b, axis=1).astype(complex)
    rho_sum = np.zeros((n_samples, n, n), dtype=complex)
    trace_block = np.empty((n_samples, n_b))
    states = np.empty((n_samples, n, n_b), dtype=complex) if collect_states else None

    co_lo = coeffs(0.0)
    sample_at = dict((s, k) for k, s in enumerate(sample_steps))
    for step in range(n_steps + 1):
        t = step * dt
        k = sample_at.get(step)
        if k is not None:
            v = co_lo[3]
            c = np.conj(v)[:, None] * a
            trace_block[k] = np.sum(np.abs(c) ** 2, axis=0)
            if cfg.normalization_policy is NormalizationPolicy.TRACE_NORMALIZED:
                c = c / np.sqrt(trace_block[k])[None, :]
            rho_sum[k] = c @ c.conj().T
            if collect_states:
                states[k] = c
        if step == n_steps:
            break
        co_mid = coeffs(t + 0.5 * dt)
        co_hi = coeffs(t + dt)
        k1 = rhs(a, co_lo)
        k2 = rhs(a + (0.5 * dt) * k1, co_mid)
        k3 = rhs(a + (0.5 * dt) * k2, co_mid)
        k4 = rhs(a + dt * k3, co_hi)
        a = a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        peak = np.abs(a).max()
        if peak > OVERFLOW_GUARD:
            worst = int(np.argmax(np.max(np.abs(a), axis=0)))
            raise NumericalInstabilityError(
                f"|c_n| reached {peak:.3e} at t={t + dt:.4f} (guard"
                f" {OVERFLOW_GUARD:g}); reduce dt",
                realization_index=first_index + worst)
        co_lo = co_hi
    return times, rho_sum, trace_block, states


def integrate_trajectory(init: InitialState, bath: BathSpec,
                         spectrum: SystemSpectrum, noise: NoiseRealization,
                         cfg: IntegratorConfig,
                         table: MemoryTable | None = None) -> TrajectorySeries:
    """Integrate a single noise realization and sample every sample_stride
    steps.  Deterministic for fixed inputs."""
    if table is None:
        table = MemoryTable(bath, spectrum)
    z = noise.z_conj[:, None]
    times, _, trace_block, states = _integrate_block(
        init.amplitudes, z, bath, spectrum, table, cfg,
        first_index=noise.realization_seed, collect_states=True)
    traj = states[:, :, 0]
    trace = trace_block[:, 0]
    drift = float(np.max(np.abs(trace - 1.0)))
    log.debug("realization %d: max |trace-1| = %.3e over %d samples",
              noise.realization_seed, drift, len(times))
    return TrajectorySeries(times=times, states=traj, trace=trace,
                            policy=cfg.normalization_policy)


def _mode_operators(fock_cut: int):
    dim = fock_cut + 1
    lower = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    number = np.diag(np.arange(dim, dtype=float))
    return lower, number


def _total_hamiltonian(bath: BathSpec, spectrum: SystemSpectrum,
                       fock_cut: int) -> np.ndarray:
    """Dense system+bath Hamiltonian on the truncated product basis, coupling
    q (b_lambda + b_lambda^dagger) per oscillator; bath zero-point energy
    dropped (a constant shift)."""
    sizes = [spectrum.n_max] + [fock_cut + 1] * bath.n_oscillators
    lower, number = _mode_operators(fock_cut)
    coupling = lower + lower.T

    def embed(ops: dict) -> np.ndarray:
        acc = np.array([[1.0 + 0j]])
        for i, d in enumerate(sizes):
            acc = np.kron(acc, ops.get(i, np.eye(d)))
        return acc

    h = embed({0: np.diag(spectrum.energies)})
    for lam, w in enumerate(bath.frequencies):
        h += w * embed({lam + 1: number})
        h += bath.g * embed({0: spectrum.q_matrix, lam + 1: coupling})
    return h


def _reduced_series(init: InitialState, bath: BathSpec,
                    spectrum: SystemSpectrum, fock_cut: int,
                    cfg: IntegratorConfig):
    n = spectrum.n_max
    bath_dim = (fock_cut + 1) ** bath.n_oscillators
    h = _total_hamiltonian(bath, spectrum, fock_cut)
    evals, vecs = np.linalg.eigh(h)
    psi0 = np.zeros(n * bath_dim, dtype=complex)
    psi0[::bath_dim] = init.amplitudes  # bath modes in their ground state
    coef0 = vecs.conj().T @ psi0
    times = cfg.dt * np.arange(0, cfg.n_steps + 1, cfg.sample_stride,
                               dtype=float)
    rhos = np.empty((len(times), n, n), dtype=complex)
    for k, t in enumerate(times):
        psi = vecs @ (np.exp(-1j * evals * t) * coef0)
        m = psi.reshape(n, bath_dim)
        rhos[k] = m @ m.conj().T
    return times, rhos


def exact_small_bath_reference(init: InitialState, bath: BathSpec,
                               spectrum: SystemSpectrum, fock_cut: int,
                               cfg: IntegratorConfig):
    """Exact reduced observables from diagonalizing the full conservative
    system+bath Hamiltonian on a truncated Fock product basis (bath starts in
    its ground state).  Validation oracle for small N; raises
    ConvergenceError if raising fock_cut by 2 moves the terminal energy by
    more than 1e-4 relative."""
    from .ensemble import ObservableSeries, observables_from_rhos

    if bath.n_oscillators > 2:
        raise ConfigError("exact reference supports at most 2 oscillators")
    if fock_cut < 4:
        raise ConfigError(f"fock_cut must be >= 4, got {fock_cut}")
    times, rhos = _reduced_series(init, bath, spectrum, fock_cut, cfg)
    series = observables_from_rhos(times, rhos, spectrum)
    _, rhos_up = _reduced_series(init, bath, spectrum, fock_cut + 2, cfg)
    up = observables_from_rhos(times, rhos_up, spectrum)
    ref = max(abs(up.energy[-1]), 1e-300)
    rel = abs(series.energy[-1] - up.energy[-1]) / ref
    if rel > 1e-4:
        raise ConvergenceError(
            f"fock_cut={fock_cut} not converged: terminal energy moves by"
            f" {rel:.2e} relative when raised to {fock_cut + 2}")
    return series

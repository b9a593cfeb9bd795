"""Finite discrete bath: frozen frequency sample, driving noise, memory kernel,
counterterm, and the analytically time-evolved memory-operator matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .spectra import SystemSpectrum

# Denominators |omega_lambda + Delta| below this take the series branch of the
# phase integral; the closed form loses digits to cancellation there.
THETA_TOL = 1e-6


def sample_frequencies(n: int, s: float, omega_min: float, omega_max: float,
                       seed: int) -> np.ndarray:
    """Draw n frequencies with probability density proportional to omega^(s+1)
    on [omega_min, omega_max] (inverse-CDF transform), sorted ascending.

    s is the spectral exponent of the would-be continuum density J(omega)
    proportional to omega^s; the mode density carries one extra power.
    """
    if n < 0:
        raise ConfigError(f"negative oscillator count {n}")
    if not 0.0 <= s <= 2.0:
        raise ConfigError(f"spectral exponent must lie in [0, 2], got {s}")
    if not 0.0 < omega_min < omega_max:
        raise ConfigError(f"bad frequency window ({omega_min}, {omega_max})")
    u = np.random.default_rng(seed).random(n)
    k = s + 2.0
    lo, hi = omega_min**k, omega_max**k
    return np.sort((lo + u * (hi - lo)) ** (1.0 / k))


@dataclass(frozen=True)
class BathSpec:
    """Immutable bath description; the frequency draw is frozen at creation
    and reused across every noise realization."""

    n_oscillators: int
    s: float
    omega_min: float
    omega_max: float
    g: float
    frequencies: np.ndarray
    frequency_seed: int

    def __post_init__(self) -> None:
        if self.n_oscillators < 0:
            raise ConfigError(f"negative oscillator count {self.n_oscillators}")
        if len(self.frequencies) != self.n_oscillators:
            raise ConfigError("frequency vector length does not match N")
        if self.g <= 0:
            raise ConfigError(f"coupling must be positive, got {self.g}")
        if not 0.0 <= self.s <= 2.0:
            raise ConfigError(f"spectral exponent must lie in [0, 2], got {self.s}")
        if self.n_oscillators and not (
                np.all(self.frequencies > self.omega_min)
                and np.all(self.frequencies < self.omega_max)):
            raise ConfigError("frequencies must lie strictly inside the window")


def make_bath(n: int, s: float = 1.0, omega_min: float = 1.1,
              omega_max: float = 2.1, g: float = 0.01, seed: int = 7,
              frequencies: np.ndarray | None = None) -> BathSpec:
    """Build a BathSpec, sampling frequencies unless an override is pinned."""
    if frequencies is None:
        frequencies = sample_frequencies(n, s, omega_min, omega_max, seed)
    else:
        frequencies = np.sort(np.asarray(frequencies, dtype=float))
    return BathSpec(n_oscillators=n, s=s, omega_min=omega_min,
                    omega_max=omega_max, g=g, frequencies=frequencies,
                    frequency_seed=seed)


@dataclass(frozen=True)
class NoiseRealization:
    """One draw of the Gaussian pairs (x_lambda, y_lambda)."""

    pairs: np.ndarray  # (N, 2)
    realization_seed: int

    @classmethod
    def draw(cls, bath: BathSpec, master_seed: int, index: int) -> "NoiseRealization":
        # counter-based derivation: any realization is recomputable on its own
        ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
        pairs = np.random.default_rng(ss).standard_normal((bath.n_oscillators, 2))
        return cls(pairs=pairs, realization_seed=index)

    @property
    def z_conj(self) -> np.ndarray:
        """z*_lambda = (x_lambda + i y_lambda) / sqrt(2)."""
        return (self.pairs[:, 0] + 1j * self.pairs[:, 1]) / np.sqrt(2.0)


def noise_value(realization: NoiseRealization, bath: BathSpec, t: float) -> complex:
    """Driving process z*_t = -i sum_lambda g z*_lambda exp(+i omega_lambda t)."""
    return complex(-1j * bath.g * np.sum(
        realization.z_conj * np.exp(1j * bath.frequencies * t)))


def kernel(bath: BathSpec, tau: float) -> complex:
    """Zero-temperature memory kernel K(tau) = sum_lambda g^2 exp(-i omega tau)."""
    return complex(bath.g**2 * np.sum(np.exp(-1j * bath.frequencies * tau)))


def counterterm_A(bath: BathSpec, t: float) -> float:
    """A(t) = sum_lambda (g^2 / omega)(cos(omega t) - 1), in [-2 sum g^2/omega, 0]."""
    w = bath.frequencies
    return float(np.sum(bath.g**2 / w * (np.cos(w * t) - 1.0))) if w.size else 0.0


def _phase_integral_series(theta: np.ndarray, t: float) -> np.ndarray:
    """Small-theta expansion of (exp(-i theta t) - 1)/(-i theta)."""
    x = theta * t
    return t * (1.0 - 0.5j * x - x**2 / 6.0 + 1j * x**3 / 24.0)


class MemoryTable:
    """Cached evaluation of the memory-operator matrix.

    The matrix element is q_mm' * F(Delta, t) where Delta = eps_m - eps_m' and

        F(Delta, t) = sum_lambda g^2 (exp(-i(omega+Delta)t) - 1)/(-i(omega+Delta)).

    Only the distinct energy gaps matter (2 n_max - 1 of them for an equally
    spaced spectrum), so F is tabulated per gap.  The lambda sum factorizes as
    exp(-i Delta t) * (B @ exp(-i omega t)) which keeps the per-step cost at
    one matrix-vector product even for large gap tables.
    """

    def __init__(self, bath: BathSpec, spectrum: SystemSpectrum,
                 theta_tol: float = THETA_TOL):
        delta = spectrum.energies[:, None] - spectrum.energies[None, :]
        self.gaps, inverse = np.unique(np.round(delta, 12), return_inverse=True)
        self.gap_index = inverse.reshape(delta.shape)
        self.theta_tol = theta_tol
        w = bath.frequencies
        theta = self.gaps[:, None] + w[None, :]
        small = np.abs(theta) < theta_tol
        with np.errstate(divide="ignore", invalid="ignore"):
            b = bath.g**2 / (-1j * theta)
        b[small] = 0.0
        self._b = b
        self._b_sum = b.sum(axis=1)
        self._omega = w
        self._g2 = bath.g**2
        # resonant (or near-resonant) entries, handled by the series branch
        self._small_gap, self._small_lam = np.nonzero(small)
        self._small_theta = theta[self._small_gap, self._small_lam]
        self._q = spectrum.q_matrix

    def gap_values(self, t: float) -> np.ndarray:
        """F(gap, t) for every distinct gap."""
        u = np.exp(-1j * self._omega * t)
        out = np.exp(-1j * self.gaps * t) * (self._b @ u) - self._b_sum
        if self._small_gap.size:
            contrib = self._g2 * _phase_integral_series(self._small_theta, t)
            np.add.at(out, self._small_gap, contrib)
        return out

    def obar_matrix(self, t: float) -> np.ndarray:
        """Memory-operator matrix: q_mm' weighted by the gap table at time t."""
        return self._q * self.gap_values(t)[self.gap_index]


def obar_element(bath: BathSpec, spectrum: SystemSpectrum, m: int, mp: int,
                 t: float, theta_tol: float = THETA_TOL) -> complex:
    """Single memory-operator matrix element for 1-based level labels.

    Kept as an independent scalar evaluation (not routed through MemoryTable)
    so the two implementations can be checked against each other and against
    direct quadrature of the memory integral.
    """
    if not (1 <= m <= spectrum.n_max and 1 <= mp <= spectrum.n_max):
        raise ConfigError(f"level labels ({m}, {mp}) outside 1..{spectrum.n_max}")
    delta = spectrum.energies[m - 1] - spectrum.energies[mp - 1]
    theta = bath.frequencies + delta
    small = np.abs(theta) < theta_tol
    f = np.empty(theta.shape, dtype=complex)
    f[~small] = (np.exp(-1j * theta[~small] * t) - 1.0) / (-1j * theta[~small])
    f[small] = _phase_integral_series(theta[small], t)
    return complex(spectrum.q_matrix[m - 1, mp - 1] * bath.g**2 * np.sum(f))

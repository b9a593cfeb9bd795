"""System eigenbasis construction.

Builds the level energies and position/momentum matrix elements that the
propagator works in: analytically for a harmonic well, numerically (Numerov
shooting plus bisection) for a Morse well.  Units are hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit
from scipy.integrate import simpson

from .errors import GridTooCoarseError, MissingLevelError, SpectrumError


class PotentialKind(Enum):
    HARMONIC = "harmonic"
    MORSE = "morse"


class Provenance(Enum):
    ANALYTIC_HO = "analytic_ho"
    NUMEROV = "numerov"


@dataclass(frozen=True)
class GridSpec:
    r_min: float
    r_max: float
    step: float

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise SpectrumError(f"grid step must be positive, got {self.step}")
        if self.r_min >= self.r_max:
            raise SpectrumError(f"empty grid [{self.r_min}, {self.r_max}]")

    def points(self) -> np.ndarray:
        n = int(round((self.r_max - self.r_min) / self.step)) + 1
        return self.r_min + self.step * np.arange(n)


@dataclass(frozen=True)
class PotentialSpec:
    kind: PotentialKind
    mass: float = 1.0
    omega: float = 1.0
    d_e: float = 30.0
    a: float = 0.08
    r_e: float = 0.0
    grid: GridSpec = field(default_factory=lambda: GridSpec(-7.4, 20.0, 1e-3))

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise SpectrumError(f"mass must be positive, got {self.mass}")
        if self.kind is PotentialKind.HARMONIC and self.omega <= 0:
            raise SpectrumError(f"omega must be positive, got {self.omega}")
        if self.kind is PotentialKind.MORSE:
            if self.d_e <= 0 or self.a <= 0:
                raise SpectrumError("Morse well depth and steepness must be positive")
            if not (self.grid.r_min < self.r_e < self.grid.r_max):
                raise SpectrumError("grid must bracket the Morse equilibrium position")

    def value(self, r: np.ndarray | float) -> np.ndarray | float:
        if self.kind is PotentialKind.HARMONIC:
            return 0.5 * self.mass * self.omega**2 * np.square(r - self.r_e)
        return self.d_e * (1.0 - np.exp(-self.a * (np.asarray(r) - self.r_e))) ** 2


def harmonic_potential(omega: float = 1.0, mass: float = 1.0,
                       grid: GridSpec | None = None) -> PotentialSpec:
    return PotentialSpec(kind=PotentialKind.HARMONIC, mass=mass, omega=omega,
                         grid=grid or GridSpec(-10.0, 10.0, 1e-3))


def morse_potential(d_e: float = 30.0, a: float = 0.08, r_e: float = 0.0,
                    mass: float = 1.0, grid: GridSpec | None = None) -> PotentialSpec:
    return PotentialSpec(kind=PotentialKind.MORSE, mass=mass, d_e=d_e, a=a, r_e=r_e,
                         grid=grid or GridSpec(-7.4, 20.0, 1e-3))


@dataclass(frozen=True)
class SystemSpectrum:
    """Level energies plus q and p matrix elements, labeled 1..n_max."""

    n_max: int
    energies: np.ndarray
    q_matrix: np.ndarray
    p_matrix: np.ndarray
    provenance: Provenance
    grid_r: np.ndarray | None = None
    wavefunctions: np.ndarray | None = None  # (n_max, len(grid_r)), Numerov only

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise SpectrumError(f"n_max must be at least 1, got {self.n_max}")
        if len(self.energies) != self.n_max:
            raise SpectrumError("energies length does not match n_max")
        if np.any(np.diff(self.energies) <= 0):
            raise SpectrumError("energies must be strictly ascending")
        scale = max(np.max(np.abs(self.q_matrix)), 1e-300)
        if np.max(np.abs(self.q_matrix - self.q_matrix.T)) > 1e-8 * scale:
            raise SpectrumError("q matrix is not symmetric to tolerance")
        # purely imaginary entries with p_nm = -p_mn, i.e. a Hermitian momentum
        p_scale = max(np.max(np.abs(self.p_matrix)), 1e-300)
        if np.max(np.abs(self.p_matrix.real)) > 1e-8 * p_scale:
            raise SpectrumError("p matrix entries are not purely imaginary")
        if np.max(np.abs(self.p_matrix + self.p_matrix.T)) > 1e-8 * p_scale:
            raise SpectrumError("p matrix is not antisymmetric to tolerance")


def ho_spectrum(omega: float, mass: float, n_max: int) -> SystemSpectrum:
    """Closed-form harmonic spectrum: eps_n = omega (n - 1/2), ladder q and p."""
    if omega <= 0 or mass <= 0 or n_max < 1:
        raise SpectrumError("omega, mass and n_max must all be positive")
    energies = omega * (np.arange(1, n_max + 1) - 0.5)
    q = np.zeros((n_max, n_max))
    p = np.zeros((n_max, n_max), dtype=complex)
    for n in range(1, n_max):
        q[n - 1, n] = q[n, n - 1] = math.sqrt(n / (2.0 * mass * omega))
        p[n - 1, n] = -1j * math.sqrt(n * mass * omega / 2.0)
        p[n, n - 1] = +1j * math.sqrt(n * mass * omega / 2.0)
    return SystemSpectrum(n_max=n_max, energies=energies, q_matrix=q, p_matrix=p,
                          provenance=Provenance.ANALYTIC_HO)


class Direction(Enum):
    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"


# Rescale threshold for the running solution; the seed is 1e-10 so a few
# rescales cover even very deep classically forbidden stretches.
_OVERFLOW = 1e100


@njit(cache=True)
def _numerov_sweep(g: np.ndarray, h: float) -> np.ndarray:
    """Three-term Numerov recurrence with y[0]=0, y[1]=seed, overflow rescue."""
    n = g.size
    y = np.zeros(n)
    y[1] = 1e-10
    h12 = h * h / 12.0
    for i in range(1, n - 1):
        y[i + 1] = (2.0 * (1.0 - 5.0 * h12 * g[i]) * y[i]
                    - (1.0 + h12 * g[i - 1]) * y[i - 1]) / (1.0 + h12 * g[i + 1])
        if abs(y[i + 1]) > _OVERFLOW:
            for k in range(i + 2):
                y[k] /= _OVERFLOW
    return y


@njit(cache=True)
def _count_sign_changes(y: np.ndarray) -> int:
    # skip exact zeros only: the oscillatory region can sit tens of orders of
    # magnitude below the forbidden-region tails (growth ~ e^WKB-action), so
    # any relative amplitude floor would swallow genuine nodes; the recurrence
    # is sign-monotone in forbidden regions, so alternations are real
    count = 0
    prev = 0.0
    for i in range(y.size):
        v = y[i]
        if v == 0.0:
            continue
        if prev != 0.0 and (v > 0.0) != (prev > 0.0):
            count += 1
        prev = v
    return count


def _nodes(y: np.ndarray) -> int:
    return _count_sign_changes(y)


def numerov_integrate(potential: PotentialSpec, energy: float,
                      direction: Direction = Direction.LEFT_TO_RIGHT,
                      ) -> tuple[np.ndarray, int]:
    """Shoot across the full grid at a trial energy.

    Returns the (max-normalized) solution and its interior node count.  The
    energy must lie below the potential at both ends so the sweep starts in a
    classically forbidden region.  Nodes are counted only up to the outer
    classical turning point: past it the sweep at an (almost) exact
    eigenvalue is dominated by round-off seeding of the growing solution,
    which can cross zero once spuriously before blowing up.
    """
    r = potential.grid.points()
    v = np.asarray(potential.value(r), dtype=float)
    if energy >= v[0] or energy >= v[-1]:
        raise SpectrumError(
            f"energy {energy} is not below the potential at both grid ends "
            f"({v[0]:.6g}, {v[-1]:.6g})")
    g = 2.0 * potential.mass * (energy - v)
    if direction is Direction.RIGHT_TO_LEFT:
        y = _numerov_sweep(g[::-1], potential.grid.step)[::-1]
        nodes = _nodes(y[_inner_index(v, energy):])
    else:
        y = _numerov_sweep(g, potential.grid.step)
        nodes = _nodes(y[:_match_index(v, energy) + 1])
    y = y / np.max(np.abs(y))
    return y, nodes


def morse_energy_analytic(n: int, potential: PotentialSpec) -> float:
    """Closed-form Morse level energy for 1-based label n (quantum number n-1)."""
    if potential.kind is not PotentialKind.MORSE:
        raise SpectrumError("analytic Morse energies need a Morse potential")
    omega_m = potential.a * math.sqrt(2.0 * potential.d_e / potential.mass)
    q = n - 1
    x = omega_m * (q + 0.5)
    if n < 1 or x >= 2.0 * potential.d_e:
        # beyond the turnover point the expression decreases again;
        # those labels do not correspond to bound levels
        raise SpectrumError(f"level label {n} is beyond the top of the bound spectrum")
    return x - x * x / (4.0 * potential.d_e)


def _pad_grid(potential: PotentialSpec, e_cap: float,
              target_action: float = 30.0,
              max_extra: int = 200_000) -> tuple[np.ndarray, np.ndarray, int]:
    """Extend the grid into the forbidden regions until the WKB action
    integral at the capping energy reaches target_action on each side.

    A hard wall at the user's grid edge shifts the upper levels visibly
    (several 1e-2 for the default Morse well, whose top level turns around
    a tenth of a length unit inside the edge).  Padding pushes that wall
    error below the discretization error while level selection still uses
    the user window.  Returns (r, V, offset of the user r_min).
    """
    h = potential.grid.step
    m = potential.mass

    def extend(r_edge: float, sign: float) -> int:
        total = 0.0
        count = 0
        r = r_edge
        while total < target_action:
            r += sign * h
            count += 1
            v = float(potential.value(r))
            total += math.sqrt(2.0 * m * max(v - e_cap, 0.0)) * h
            if count > max_extra:
                raise GridTooCoarseError(
                    "cannot build a decaying tail region; the potential stays "
                    "too close to the capping energy beyond the grid")
        return count

    n_left = extend(potential.grid.r_min, -1.0)
    n_right = extend(potential.grid.r_max, +1.0)
    n_user = int(round((potential.grid.r_max - potential.grid.r_min) / h)) + 1
    r = potential.grid.r_min + h * (np.arange(n_left + n_user + n_right) - n_left)
    return r, np.asarray(potential.value(r), dtype=float), n_left


def _match_index(v: np.ndarray, energy: float) -> int:
    """Index of the outer classical turning point (last allowed grid point)."""
    allowed = np.nonzero(v <= energy)[0]
    if allowed.size == 0:
        raise SpectrumError(f"energy {energy} has no classically allowed region")
    return int(allowed[-1])


def _inner_index(v: np.ndarray, energy: float) -> int:
    """Index of the inner classical turning point (first allowed grid point)."""
    allowed = np.nonzero(v <= energy)[0]
    if allowed.size == 0:
        raise SpectrumError(f"energy {energy} has no classically allowed region")
    return int(allowed[0])


def _mismatch(g: np.ndarray, h: float, im: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Log-derivative discontinuity of the two shooting solutions at im."""
    yl = _numerov_sweep(g[:im + 2], h)
    yr = _numerov_sweep(g[im - 1:][::-1], h)[::-1]
    dl = (yl[im + 1] - yl[im - 1]) / (2.0 * h)
    dr = (yr[2] - yr[0]) / (2.0 * h)
    if yl[im] == 0.0 or yr[1] == 0.0:
        return math.inf, yl, yr
    return dl / yl[im] - dr / yr[1], yl, yr


def morse_eigensolve(potential: PotentialSpec,
                     level_window: tuple[int, int] | None = None) -> SystemSpectrum:
    """Find the bound Morse levels whose outer turning point lies inside
    the grid, then fill q and p matrix elements by quadrature.

    Levels are bracketed by a node-count scan, pinned down by bisection on
    the node count and polished by bisection on the sign of the shooting
    mismatch (log-derivative discontinuity at the outer turning point).
    """
    if potential.kind is not PotentialKind.MORSE:
        raise SpectrumError("morse_eigensolve needs a Morse potential")
    h = potential.grid.step
    e_cap = float(potential.value(potential.grid.r_max))
    r, v, _ = _pad_grid(potential, e_cap)

    def nodes_at(energy: float) -> int:
        g = 2.0 * potential.mass * (energy - v)
        return _nodes(_numerov_sweep(g, h))

    # scan upward counting nodes; refine any bracket where the count jumps
    # by more than one (adjacent levels inside one scan step)
    e_floor = float(np.min(v)) + 1e-9
    brackets: list[tuple[float, float, int]] = []

    def refine(e_a: float, n_a: int, e_b: float, n_b: int) -> None:
        if n_b == n_a:
            return
        if n_b == n_a + 1:
            brackets.append((e_a, e_b, n_b))
            return
        if e_b - e_a < 1e-12:
            raise GridTooCoarseError(
                f"cannot separate adjacent levels near E = {e_a:.9g}")
        e_m = 0.5 * (e_a + e_b)
        n_m = nodes_at(e_m)
        refine(e_a, n_a, e_m, n_m)
        refine(e_m, n_m, e_b, n_b)

    e_prev, n_prev = e_floor, nodes_at(e_floor)
    if n_prev != 0:
        raise GridTooCoarseError("node count at the potential floor is nonzero")
    scan = 0.05
    while e_prev < e_cap:
        e_next = min(e_prev + scan, e_cap)
        n_next = nodes_at(e_next)
        refine(e_prev, n_prev, e_next, n_next)
        e_prev, n_prev = e_next, n_next
        if e_next >= e_cap:
            break

    for k, (_, _, n_b) in enumerate(brackets, start=1):
        if n_b != k:
            raise MissingLevelError(
                f"node counts skip an integer near level {k}: got {n_b}")

    energies = []
    waves = []
    for k, (e_a, e_b, _) in enumerate(brackets, start=1):
        # stage 1: node-count bisection (monotone integer predicate)
        lo, hi = e_a, e_b
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            if nodes_at(mid) >= k:
                hi = mid
            else:
                lo = mid
        # stage 2: mismatch-sign bisection inside the narrowed bracket
        im = _match_index(v, 0.5 * (lo + hi))
        w_lo, _, _ = _mismatch(2.0 * potential.mass * (lo - v), h, im)
        w_hi, _, _ = _mismatch(2.0 * potential.mass * (hi - v), h, im)
        if math.isfinite(w_lo) and math.isfinite(w_hi) and (w_lo > 0) != (w_hi > 0):
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                w_mid, _, _ = _mismatch(2.0 * potential.mass * (mid - v), h, im)
                if (w_mid > 0) == (w_lo > 0):
                    lo, w_lo = mid, w_mid
                else:
                    hi, w_hi = mid, w_mid
        else:
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                if nodes_at(mid) >= k:
                    hi = mid
                else:
                    lo = mid
        e_k = 0.5 * (lo + hi)
        _, yl, yr = _mismatch(2.0 * potential.mass * (e_k - v), h, im)
        psi = np.empty_like(v)
        psi[:im + 1] = yl[:im + 1]
        psi[im:] = yr[1:] * (yl[im] / yr[1])
        psi /= math.sqrt(simpson(psi * psi, dx=h))
        energies.append(e_k)
        waves.append(psi)

    if not energies:
        raise SpectrumError("no bound level found inside the grid window")

    if level_window is not None:
        lo_w, hi_w = level_window
        if not (1 <= lo_w <= hi_w <= len(energies)):
            raise SpectrumError(
                f"level window {level_window} outside found range 1..{len(energies)}")
        energies = energies[lo_w - 1:hi_w]
        waves = waves[lo_w - 1:hi_w]

    n_lev = len(energies)
    phi = np.asarray(waves)
    q = np.empty((n_lev, n_lev))
    weighted = phi * r
    for n in range(n_lev):
        for m in range(n, n_lev):
            q[n, m] = q[m, n] = simpson(weighted[n] * phi[m], dx=h)

    dphi = np.empty_like(phi)
    # interior: 5-point 4th-order stencil, edges 2nd order (tails vanish there)
    dphi[:, 2:-2] = (-phi[:, 4:] + 8.0 * phi[:, 3:-1]
                     - 8.0 * phi[:, 1:-3] + phi[:, :-4]) / (12.0 * h)
    dphi[:, :2] = np.gradient(phi[:, :4], h, axis=1)[:, :2]
    dphi[:, -2:] = np.gradient(phi[:, -4:], h, axis=1)[:, -2:]
    p = np.empty((n_lev, n_lev), dtype=complex)
    for n in range(n_lev):
        for m in range(n_lev):
            p[n, m] = -1j * simpson(phi[n] * dphi[m], dx=h)
    # the exact matrix is purely imaginary and antisymmetric (Hermitian);
    # project out the quadrature remainder
    p = 0.5 * (p - p.T)

    return SystemSpectrum(n_max=n_lev, energies=np.asarray(energies),
                          q_matrix=q, p_matrix=p, provenance=Provenance.NUMEROV,
                          grid_r=r, wavefunctions=phi)

"""Ensemble averaging, observables, and deterministic parallel reduction."""

import math

import numpy as np
import pytest

from qsdbath import (EnsembleConfig, IntegratorConfig, NoiseRealization,
                     NumericalInstabilityError, energy_expectation,
                     integrate_trajectory, level_energy_series, make_bath,
                     momentum_expectation, phase_series, position_expectation,
                     purity, run_ensemble)


CFG_SHORT = IntegratorConfig(dt=0.01, t_max=10.0, sample_stride=100)


def ens(r, seed=1234, workers=1):
    return EnsembleConfig(n_realizations=r, master_seed=seed,
                          parallel_degree=workers)


# ------------------------------------------------------------ basic runs

def test_no_bath_constants(ho15, uniform15):
    series, _ = run_ensemble(uniform15, make_bath(0), ho15,
                             IntegratorConfig(dt=0.01, t_max=100.0,
                                              sample_stride=100),
                             ens(3))
    assert np.max(np.abs(series.energy - 7.5)) < 1e-10
    assert np.max(np.abs(series.purity - 1.0)) < 1e-10
    assert np.max(np.abs(series.trace - 1.0)) < 1e-10


def test_density_hermitian_and_initial_purity(ho15, bath10, uniform15):
    series, density = run_ensemble(uniform15, bath10, ho15, CFG_SHORT, ens(8))
    rho = density.rho
    assert np.max(np.abs(rho - np.conj(np.transpose(rho, (0, 2, 1))))) < 1e-12
    assert series.purity[0] == pytest.approx(1.0, abs=1e-12)
    assert series.trace[0] == pytest.approx(1.0, abs=1e-12)


def test_purity_equals_direct_matrix_square(ho15, bath10, uniform15):
    _, density = run_ensemble(uniform15, bath10, ho15, CFG_SHORT, ens(8))
    for k in (0, len(density.times) // 2, len(density.times) - 1):
        direct = float(np.trace(density.rho[k] @ density.rho[k]).real)
        assert purity(density, k) == pytest.approx(direct, abs=1e-12)


def test_initial_density_term_count(ho15, bath10, uniform15):
    # the uniform entangled state populates every element: 15 diagonal
    # plus 210 off-diagonal terms, and their square sum is 1
    _, density = run_ensemble(uniform15, bath10, ho15, CFG_SHORT, ens(4))
    rho0 = density.rho[0]
    diag = np.abs(np.diag(rho0)) > 1e-15
    off = np.abs(rho0 - np.diag(np.diag(rho0))) > 1e-15
    assert int(diag.sum()) == 15
    assert int(off.sum()) == 210
    assert purity(density, 0) == pytest.approx(1.0, abs=1e-12)


def test_parallel_degree_does_not_change_results(ho15, uniform15):
    bath = make_bath(5, g=0.05, seed=7)
    cfg = IntegratorConfig(dt=0.01, t_max=5.0, sample_stride=50)
    base = None
    for workers in (1, 4, 16):
        series, density = run_ensemble(uniform15, bath, ho15, cfg,
                                       ens(150, workers=workers))
        if base is None:
            base = (series.energy.copy(), density.rho.copy())
        else:
            assert np.array_equal(series.energy, base[0])
            assert np.array_equal(density.rho, base[1])


def test_overflow_report_names_realization(ho15, uniform15):
    bath = make_bath(10, g=2.0, seed=7)
    cfg = IntegratorConfig(dt=1.0, t_max=50.0, sample_stride=10)
    with pytest.raises(NumericalInstabilityError) as exc:
        run_ensemble(uniform15, bath, ho15, cfg, ens(4))
    assert exc.value.realization_index is not None
    assert 0 <= exc.value.realization_index < 4


def test_monte_carlo_error_halves_with_doubled_realizations(ho15, uniform15):
    # standard-error ratio between 40 and 80 realizations, ten repeats
    # each; the sqrt(2) law puts it near 1.41 (the ratio estimator from
    # ten repeats is itself noisy, hence the wide accepted band)
    bath = make_bath(10, s=1.0, g=0.01, seed=7)
    stds = {}
    for r, off in ((40, 0), (80, 500)):
        vals = []
        for rep in range(10):
            series, _ = run_ensemble(uniform15, bath, ho15, CFG_SHORT,
                                     ens(r, seed=60000 + 1000 * rep + off))
            vals.append(series.energy[-1])
        stds[r] = np.std(vals, ddof=1)
    assert 1.2 <= stds[40] / stds[80] <= 1.7


# ------------------------------------------------------------ observables

def test_energy_expectation_values(ho15, morse_spec, uniform15):
    assert energy_expectation(uniform15.amplitudes, ho15) == pytest.approx(
        7.5, abs=1e-12)
    ground = np.zeros(15, dtype=complex)
    ground[0] = 1.0
    assert energy_expectation(ground, ho15) == pytest.approx(0.5, abs=1e-15)
    from qsdbath import InitialStateKind, initial_state
    packet = initial_state(InitialStateKind.GAUSSIAN_PACKET, morse_spec.n_max)
    e = energy_expectation(packet.amplitudes, morse_spec)
    assert e == pytest.approx(8.829, abs=1e-3)   # frozen from this spectrum
    assert e == pytest.approx(8.8, abs=0.3)


def test_position_expectation_values(ho15, uniform15):
    want = (2.0 / 15.0) * sum(math.sqrt(n / 2.0) for n in range(1, 15))
    assert position_expectation(uniform15.amplitudes, ho15) == pytest.approx(
        want, abs=1e-12)
    for n in (0, 7, 14):
        e_n = np.zeros(15, dtype=complex)
        e_n[n] = 1.0
        assert position_expectation(e_n, ho15) == 0.0
        assert momentum_expectation(e_n, ho15) == 0.0


def test_no_bath_phase_curve_closed(ho15, uniform15):
    bath = make_bath(0)
    noise = NoiseRealization.draw(bath, 1, 0)
    cfg = IntegratorConfig(dt=0.01, t_max=50.0, sample_stride=10)
    traj = integrate_trajectory(uniform15, bath, ho15, noise, cfg)
    _, qs, ps = phase_series(traj, ho15)
    radius = qs**2 + ps**2
    assert np.max(np.abs(radius - radius[0])) < 1e-10 * radius[0]


def test_level_energy_rows_constant_without_bath(ho15, uniform15):
    series, _ = run_ensemble(uniform15, make_bath(0), ho15, CFG_SHORT, ens(2))
    lev = series.level_energies
    assert lev.shape[0] == 15
    assert np.max(np.abs(lev - lev[:, :1])) < 1e-12
    # rows are eps_n/15 for the uniform state
    assert np.allclose(lev[:, 0], ho15.energies / 15.0, atol=1e-12)


def test_level_energy_series_matches_density(ho15, bath10, uniform15):
    series, density = run_ensemble(uniform15, bath10, ho15, CFG_SHORT, ens(8))
    lev = level_energy_series(density, ho15)
    assert np.allclose(lev, series.level_energies, atol=1e-14)

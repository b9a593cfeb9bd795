"""Decay-law fits: exact on synthetic data, breakpoint detection, and the
exponent-vs-N scaling models."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsdbath import (FitDomainError, FitModel, ScalingModel, detect_regimes,
                     first_crossing, fit_exponent_scaling, fit_exponential,
                     fit_powerlaw)


# ------------------------------------------------------------- exactness

def test_exponential_exact():
    t = np.linspace(0.0, 10.0, 101)
    r = fit_exponential(t, 3.0 * np.exp(-0.5 * t))
    assert r.model is FitModel.EXPONENTIAL
    assert r.exponent == pytest.approx(0.5, abs=1e-10)
    assert r.prefactor == pytest.approx(3.0, abs=1e-10)
    assert r.sse < 1e-10  # round-off only on noiseless data


def test_powerlaw_exact():
    t = np.linspace(10.0, 500.0, 200)
    r = fit_powerlaw(t, t ** (-1.245))
    assert r.model is FitModel.POWER_LAW
    assert r.exponent == pytest.approx(1.245, abs=1e-10)
    assert r.prefactor == pytest.approx(1.0, abs=1e-10)


def test_window_restricts_fit():
    t = np.linspace(0.0, 20.0, 201)
    y = np.exp(-0.2 * t)
    y[t > 10.0] = np.exp(-2.0) * np.exp(-0.7 * (t[t > 10.0] - 10.0))
    r = fit_exponential(t, y, window=(0.0, 10.0))
    assert r.exponent == pytest.approx(0.2, abs=1e-10)
    assert r.window == (0.0, 10.0)
    assert r.n_points == 101


@given(alpha=st.floats(0.01, 2.0), pref=st.floats(0.1, 50.0))
@settings(max_examples=60, deadline=None)
def test_exponential_recovery_property(alpha, pref):
    t = np.linspace(0.0, 12.0, 120)
    r = fit_exponential(t, pref * np.exp(-alpha * t))
    assert abs(r.exponent - alpha) < 1e-10
    assert abs(r.prefactor - pref) < 1e-9 * max(1.0, pref)


@given(beta=st.floats(0.05, 3.0), scale=st.floats(0.01, 100.0))
@settings(max_examples=60, deadline=None)
def test_scale_equivariance_property(beta, scale):
    t = np.linspace(1.0, 300.0, 250)
    base = fit_powerlaw(t, t ** (-beta))
    scaled = fit_powerlaw(t, scale * t ** (-beta))
    assert abs(scaled.exponent - base.exponent) < 1e-12
    assert scaled.prefactor == pytest.approx(scale * base.prefactor,
                                             rel=1e-9)


# ------------------------------------------------------------ error paths

def test_fit_rejects_bad_inputs():
    t = np.linspace(0.0, 10.0, 50)
    with pytest.raises(FitDomainError):
        fit_exponential(t[:5], np.exp(-t[:5]))
    with pytest.raises(FitDomainError):
        fit_exponential(t, np.exp(-t) - 0.5)  # non-positive values
    with pytest.raises(FitDomainError):
        fit_exponential(t, np.exp(-t), window=(9.5, 9.9))  # < 8 points
    with pytest.raises(FitDomainError):
        fit_powerlaw(np.linspace(-5.0, -1.0, 20), np.ones(20))  # t <= 0


# ----------------------------------------------------------- segmentation

def two_regime_series(t_break=100.0, alpha=0.03, beta=0.6):
    t = np.arange(1.0, 501.0)
    y = np.exp(-alpha * t)
    c = np.exp(-alpha * t_break) * t_break**beta
    late = t > t_break
    y[late] = c * t[late] ** (-beta)
    return t, y


def test_breakpoint_recovery():
    t, y = two_regime_series()
    seg = detect_regimes(t, y, max_segments=2)
    assert seg.multi_regime
    assert len(seg.segments) == 2
    assert seg.breakpoints[0] == pytest.approx(100.0, abs=10.0)
    assert seg.segments[0].model is FitModel.EXPONENTIAL
    assert seg.segments[1].model is FitModel.POWER_LAW
    assert seg.segments[0].exponent == pytest.approx(0.03, rel=0.1)
    assert seg.segments[1].exponent == pytest.approx(0.6, rel=0.1)


def test_pure_exponential_single_segment():
    t = np.arange(1.0, 401.0)
    seg = detect_regimes(t, 5.0 * np.exp(-0.02 * t), max_segments=2)
    assert not seg.multi_regime
    assert len(seg.segments) == 1
    assert seg.segments[0].exponent == pytest.approx(0.02, rel=0.05)


def test_segmentation_sse_monotone_in_allowance():
    t, y = two_regime_series()
    rng = np.random.default_rng(11)
    y = y * np.exp(rng.normal(0.0, 0.01, len(y)))  # mild log noise
    sses = []
    for k in (1, 2, 3):
        models = (FitModel.EXPONENTIAL,) * (k - 1) + (FitModel.POWER_LAW,)
        seg = detect_regimes(t, y, max_segments=k, model_sequence=models)
        sses.append(seg.total_sse)
    assert sses[1] <= sses[0] + 1e-12
    assert sses[2] <= sses[1] + 1e-12


def test_detect_regimes_validation():
    t = np.arange(1.0, 101.0)
    y = np.exp(-0.1 * t)
    with pytest.raises(FitDomainError):
        detect_regimes(t, y, max_segments=4)
    with pytest.raises(FitDomainError):
        detect_regimes(t, y, max_segments=2,
                       model_sequence=(FitModel.QUADRATIC, FitModel.POWER_LAW))
    with pytest.raises(FitDomainError):
        detect_regimes(t, np.zeros_like(t), max_segments=2)


# ---------------------------------------------------------------- scaling

def test_two_power_law_scaling_exact():
    ns = np.array([2.0, 5.0, 10.0, 20.0, 30.0, 60.0, 120.0, 240.0, 480.0])
    crossover = 30.0
    vals = np.where(ns <= crossover, ns**0.749,
                    crossover ** (0.749 - 0.362) * ns**0.362)
    small, large = fit_exponent_scaling(ns, vals, ScalingModel.TWO_POWER_LAWS)
    assert small.exponent == pytest.approx(0.749, abs=1e-6)
    assert large.exponent == pytest.approx(0.362, abs=1e-6)
    assert small.window[1] <= large.window[0]


def test_quadratic_scaling_exact():
    # coefficient magnitudes as in the Morse sweep discussion
    a, b, c = 3.07e-7, 2.25e-5, 2.29e-4
    ns = np.array([1.0, 10.0, 50.0, 100.0, 150.0])
    vals = a * ns**2 + b * ns + c
    (fit,) = fit_exponent_scaling(ns, vals, ScalingModel.QUADRATIC)
    assert fit.coefficients is not None
    ca, cb, cc = fit.coefficients
    assert ca == pytest.approx(a, rel=1e-9)
    assert cb == pytest.approx(b, rel=1e-9)
    assert cc == pytest.approx(c, rel=1e-9)
    assert fit.exponent == pytest.approx(a, rel=1e-9)


def test_scaling_rejects_degenerate_input():
    ns = np.array([1.0, 2.0, 3.0])
    with pytest.raises(FitDomainError):
        fit_exponent_scaling(ns, ns, ScalingModel.QUADRATIC)
    ns4 = np.array([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(FitDomainError):
        fit_exponent_scaling(ns4, -ns4, ScalingModel.TWO_POWER_LAWS)


# ---------------------------------------------------------- first crossing

def test_first_crossing_interpolates():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([1.0, 0.5, 0.2, 0.1])
    got = first_crossing(t, y, 0.4)
    assert got == pytest.approx(1.0 + (0.5 - 0.4) / (0.5 - 0.2), abs=1e-12)


def test_first_crossing_none_when_above():
    t = np.array([0.0, 1.0, 2.0])
    assert first_crossing(t, np.array([1.0, 0.9, 0.8]), 0.5) is None

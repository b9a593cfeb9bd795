"""Stochastic state-diffusion simulator for a particle coupled to a finite
discrete bath of harmonic oscillators.

The package integrates the linear (non-norm-preserving) stochastic
Schroedinger equation with an exact memory term for a system particle in a
harmonic or Morse well, averages observables over many noise realizations,
and fits exponential / power-law decay regimes to the results.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    FitDomainError,
    GridTooCoarseError,
    MissingLevelError,
    NumericalInstabilityError,
    QsdError,
    SpectrumError,
)
from .spectra import (
    Direction,
    GridSpec,
    PotentialKind,
    PotentialSpec,
    Provenance,
    SystemSpectrum,
    harmonic_potential,
    ho_spectrum,
    morse_eigensolve,
    morse_energy_analytic,
    morse_potential,
    numerov_integrate,
)
from .bath import (
    BathSpec,
    MemoryTable,
    NoiseRealization,
    counterterm_A,
    kernel,
    make_bath,
    noise_value,
    obar_element,
    sample_frequencies,
)
from .dynamics import (
    InitialState,
    InitialStateKind,
    IntegratorConfig,
    NormalizationPolicy,
    TrajectorySeries,
    TrajectoryState,
    derivative,
    exact_small_bath_reference,
    initial_state,
    integrate_trajectory,
)
from .ensemble import (
    EnsembleConfig,
    ObservableSeries,
    ReducedDensity,
    energy_expectation,
    level_energy_series,
    momentum_expectation,
    phase_series,
    position_expectation,
    purity,
    run_ensemble,
)
from .fitting import (
    FitModel,
    FitResult,
    RegimeSegmentation,
    ScalingModel,
    detect_regimes,
    first_crossing,
    fit_exponent_scaling,
    fit_exponential,
    fit_powerlaw,
)

"""Shared fixtures. The Morse eigensolve is the only expensive setup
(about a second after the first numba compile), so it is session scoped."""

import pytest

from qsdbath import (GridSpec, InitialStateKind, PotentialSpec, ho_spectrum,
                     initial_state, make_bath, morse_eigensolve,
                     morse_potential)


@pytest.fixture(scope="session")
def ho15():
    return ho_spectrum(1.0, 1.0, 15)


@pytest.fixture(scope="session")
def morse_pot() -> PotentialSpec:
    return morse_potential(d_e=30.0, a=0.08, r_e=0.0, mass=1.0,
                           grid=GridSpec(-7.4, 20.0, 1e-3))


@pytest.fixture(scope="session")
def morse_spec(morse_pot):
    return morse_eigensolve(morse_pot)


@pytest.fixture(scope="session")
def bath10():
    return make_bath(10)


@pytest.fixture(scope="session")
def uniform15():
    return initial_state(InitialStateKind.UNIFORM_ENTANGLED, 15)

"""
Tests for the exact finite-bath evolution
"""

from pathlib import Path

import numpy as np
import pytest

from config.scenario import load_scenario
from physics import (
    DiscreteBathScenario,
    DisplacedMode,
    EnvInitState,
    FanoError,
    FrequencyCutoff,
    GaussianModeState,
    LorentzianSpectralDensity,
    SqueezedMode,
    TimeGrid,
    build_coefficients,
    one_particle_propagator,
    oracle_global_gibbs_expectation,
    oracle_green,
    oracle_moments,
    propagate_closed_form,
    solve_green,
    steady_excitation,
)
from physics.oracle import total_excitation
from physics.quadrature import planck
from physics.spectral import DiscreteSpectralDensity

SCENARIO_DIR = Path(__file__).parent / "data" / "scenarios"
BATH_CUTOFF = FrequencyCutoff(omega_max=20.0, use_full_real_axis=True, omega_min=0.5)


def two_level(omega0=1.0, omega1=1.0, coupling=0.1):
    bath = DiscreteSpectralDensity(np.array([omega1]), np.array([coupling]))
    return DiscreteBathScenario(omega0, bath)


def test_resonant_pair_beats():
    grid = TimeGrid(0.1, 200)
    green = oracle_green(two_level(), grid)
    expected = np.exp(-1j * grid.times) * np.cos(0.1 * grid.times)
    np.testing.assert_allclose(green, expected, atol=1e-12)


def test_propagator_is_unitary():
    bath = DiscreteSpectralDensity(np.array([0.5, 1.0, 1.5]), np.array([0.1, 0.2j, 0.05]))
    scenario = DiscreteBathScenario(1.1, bath)
    U = one_particle_propagator(scenario, 3.7)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(4), atol=1e-12)
    with pytest.raises(ValueError):
        one_particle_propagator(scenario, -1.0)


def test_coherent_system_moments():
    scenario = two_level()
    grid = TimeGrid(0.1, 100)
    states = oracle_moments(scenario, GaussianModeState.coherent(0.5), grid)
    green = oracle_green(scenario, grid)

    np.testing.assert_allclose(states.mean, 0.5 * green, atol=1e-12)
    np.testing.assert_allclose(states.occupation, 0.25 * np.abs(green) ** 2, atol=1e-12)


def test_total_excitation_is_conserved():
    bath = DiscreteSpectralDensity(np.array([0.8, 1.3]), np.array([0.2, 0.3]))
    scenario = DiscreteBathScenario(1.0, bath, means=[0.4j, 0.0], occupations=[0.2, 0.7], pairs=[0.1, 0.0])
    state0 = GaussianModeState(0.3, 0.05, 0.5)

    assert total_excitation(scenario, state0, 7.0) == pytest.approx(total_excitation(scenario, state0, 0.0))


def test_weak_coupling_gibbs_is_local_planck():
    scenario = two_level(omega0=1.0, omega1=1.5, coupling=0.005)
    assert oracle_global_gibbs_expectation(scenario, 1.0) == pytest.approx(planck(1.0, 1.0), rel=1e-3)


def test_negative_level_has_no_gibbs_state():
    scenario = two_level(omega0=0.05, omega1=1.0, coupling=0.5)
    with pytest.raises(FanoError):
        oracle_global_gibbs_expectation(scenario, 1.0)


def test_unphysical_bath_moments_are_rejected():
    bath = DiscreteSpectralDensity(np.array([1.0]), np.array([0.1]))
    with pytest.raises(ValueError):
        DiscreteBathScenario(1.0, bath, occupations=[0.1], pairs=[1.0])
    with pytest.raises(ValueError):
        DiscreteBathScenario(1.0, bath, means=[0.0, 1.0])


def test_special_modes_snap_to_distinct_bath_modes():
    bath = DiscreteSpectralDensity(np.array([1.0, 2.0]), np.array([0.1, 0.2]))
    env = EnvInitState(displaced=(DisplacedMode(1.9, 0.3, 1.0),))
    scenario, snapped = DiscreteBathScenario.from_bath(1.0, bath, env)

    assert scenario.means.tolist() == [0.0, 1.0]
    assert snapped.displaced[0].omega == 2.0
    assert snapped.displaced[0].coupling == 0.2

    crowded = EnvInitState(displaced=(DisplacedMode(1.0, 0.1, 1.0), DisplacedMode(1.1, 0.1, 1.0)))
    with pytest.raises(ValueError):
        DiscreteBathScenario.from_bath(1.0, bath, crowded)


@pytest.mark.parametrize("name", ["oracle_lorentzian.yaml", "oracle_squeezed.yaml"])
def test_bundled_oracle_scenarios_declare_their_grid_modes(caplog, name):
    scenario = load_scenario(SCENARIO_DIR / name).build()
    (declared,) = scenario.environment.displaced + scenario.environment.squeezed
    with caplog.at_level("WARNING", logger="physics.oracle"):
        _, snapped = DiscreteBathScenario.from_continuum(
            scenario.spectral_density, scenario.omega0, scenario.config.oracle.n_modes,
            scenario.environment, scenario.oracle_cutoff,
        )

    (mode,) = snapped.displaced + snapped.squeezed
    assert mode.omega == pytest.approx(declared.omega, abs=1e-12)
    assert abs(mode.coupling - declared.coupling) < 1e-7
    assert not [r for r in caplog.records if "replaced" in r.getMessage()]


def test_off_grid_mode_is_reported(caplog):
    bath = DiscreteSpectralDensity(np.array([1.0, 2.0]), np.array([0.1, 0.2]))
    env = EnvInitState(displaced=(DisplacedMode(1.9, 0.0, 1.0),))
    with caplog.at_level("WARNING", logger="physics.oracle"):
        DiscreteBathScenario.from_bath(1.0, bath, env)
    assert any("replaced" in r.getMessage() for r in caplog.records)


def central_moments(states):
    return states.mean, states.pair - states.mean ** 2, states.occupation - np.abs(states.mean) ** 2


@pytest.mark.parametrize("env, state0", [
    (EnvInitState(beta=1.0), GaussianModeState.thermal(0.5)),
    (EnvInitState(beta=1.0, displaced=(DisplacedMode(1.01, 0.02522628, 3.0),)),
     GaussianModeState.coherent(0.5 + 0.5j)),
    (EnvInitState(beta=1.0, squeezed=(SqueezedMode(1.01, 0.02522628, 0.5),)),
     GaussianModeState.coherent(0.5 + 0.5j)),
], ids=["thermal", "displaced", "squeezed"])
def test_finite_bath_matches_master_equation(env, state0):
    J = LorentzianSpectralDensity(0.2, 0.5, 1.0)
    grid = TimeGrid.spanning(20.0, 0.01)
    bath, snapped = DiscreteBathScenario.from_continuum(J, 1.0, 2000, env, BATH_CUTOFF)
    assert grid.duration < 0.5 * bath.recurrence_time

    green = solve_green(J, 1.0, grid, BATH_CUTOFF)
    coeffs = build_coefficients(green, J, snapped, BATH_CUTOFF)
    master = propagate_closed_form(state0, green, coeffs)
    exact = oracle_moments(bath, state0, grid)

    assert np.max(np.abs(green.values - oracle_green(bath, grid))) < 1e-4
    for ours, reference in zip(central_moments(master), central_moments(exact)):
        assert np.max(np.abs(ours - reference)) < 1e-4


@pytest.fixture(scope="module")
def dense_half_axis_bath():
    J = LorentzianSpectralDensity(0.04, 0.1, 1.0)
    cutoff = FrequencyCutoff(omega_max=20.0, use_full_real_axis=False)
    bath, _ = DiscreteBathScenario.from_continuum(J, 1.0, 4000, EnvInitState(beta=1.0), cutoff)
    return J, cutoff, bath


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.5, 1.0, 5.0])
def test_global_gibbs_state_matches_steady_excitation(dense_half_axis_bath, beta):
    J, cutoff, bath = dense_half_axis_bath
    occupation, _ = steady_excitation(J, 1.0, beta, cutoff)
    assert oracle_global_gibbs_expectation(bath, beta, cutoff.omega_min) == pytest.approx(occupation, abs=1e-3)

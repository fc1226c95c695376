"""
Tests for the thermodynamic ledger of the central mode
"""

from pathlib import Path

import numpy as np
import pytest

from config.scenario import load_scenario
from physics import (
    EnvInitState,
    FlatSpectralDensity,
    GaussianModeState,
    LorentzianSpectralDensity,
    MonochromaticDrive,
    TimeGrid,
    build_coefficients,
    driven_moments,
    gibbs_fixed_point_residual,
    green_flat,
    green_lorentzian_closed,
    non_markovian_witness,
    propagate_closed_form,
    random_gaussian_states,
    solve_green,
    thermodynamics,
)
from physics.thermo import gibbs_residual_max

SCENARIO_DIR = Path(__file__).parent / "data" / "scenarios"


@pytest.fixture(scope="module")
def flat_thermal():
    green = green_flat(0.5, 1.0, TimeGrid(0.01, 1001))
    coeffs = build_coefficients(green, FlatSpectralDensity(0.5), EnvInitState(beta=1.0))
    states = propagate_closed_form(GaussianModeState(0.4 - 0.2j, 0.1 + 0.05j, 0.6), green, coeffs)
    return coeffs, states, thermodynamics(coeffs, states)


def test_first_law_closes(flat_thermal):
    _, _, record = flat_thermal
    assert record.first_law_residual < 1e-12


def test_time_independent_generator_does_no_work(flat_thermal):
    _, _, record = flat_thermal
    np.testing.assert_allclose(record.work, 0.0, atol=1e-12)


def test_heat_rates_integrate_to_closure_heat(flat_thermal):
    _, _, record = flat_thermal
    assert record.heat_split_residual < 1e-8


def test_heat_split_from_a_hot_thermal_start():
    green = green_flat(0.2, 1.0, TimeGrid(0.01, 2001))
    coeffs = build_coefficients(green, FlatSpectralDensity(0.2), EnvInitState(beta=1.0))
    record = thermodynamics(coeffs, propagate_closed_form(GaussianModeState.thermal(2.0), green, coeffs))
    assert record.heat_split_residual / max(1.0, float(np.max(np.abs(record.heat)))) < 1e-8


def test_heat_split_with_a_moving_frequency():
    J = LorentzianSpectralDensity(0.1, 0.5, 0.8)
    green = green_lorentzian_closed(0.1, 0.5, 0.8, 1.0, TimeGrid(0.01, 2001))
    coeffs = build_coefficients(green, J, EnvInitState(beta=1.0))
    record = thermodynamics(coeffs, propagate_closed_form(GaussianModeState.thermal(2.0), green, coeffs))

    assert np.ptp(coeffs.omega_r) > 1e-3
    assert np.max(np.abs(record.work)) > 1e-4
    assert record.first_law_residual < 1e-12
    assert record.heat_split_residual / max(1.0, float(np.max(np.abs(record.heat)))) < 1e-8


def test_renormalized_temperature_reproduces_excitation(flat_thermal):
    coeffs, _, record = flat_thermal
    defined = record.beta_r_defined
    assert np.count_nonzero(defined) > 0.9 * defined.size

    occupation = 1.0 / np.expm1(record.beta_r[defined] * coeffs.omega_r[defined])
    np.testing.assert_allclose(occupation, coeffs.excitation[defined], rtol=1e-9)
    assert record.coverage == pytest.approx(np.count_nonzero(defined) / defined.size)


def test_entropy_rate_matches_numerical_derivative(flat_thermal):
    coeffs, states, record = flat_thermal
    numerical = np.gradient(states.entropy(), coeffs.grid.dt)
    np.testing.assert_allclose(record.entropy_rate[1:-1], numerical[1:-1], atol=1e-4)


def test_markovian_bath_produces_entropy(flat_thermal):
    _, _, record = flat_thermal
    assert np.nanmin(record.entropy_production_rate) >= -1e-9
    assert non_markovian_witness(record) is None


def test_markovian_bath_produces_entropy_from_any_initial_state(flat_thermal):
    coeffs, _, _ = flat_thermal
    for state in random_gaussian_states(20, seed=0):
        record = thermodynamics(coeffs, propagate_closed_form(state, coeffs.green, coeffs))
        assert np.nanmin(record.entropy_production_rate) >= -1e-9


def test_gibbs_state_is_a_fixed_point(flat_thermal):
    coeffs, _, _ = flat_thermal
    assert gibbs_residual_max(coeffs) < 1e-10

    d_mean, d_pair, d_occupation = gibbs_fixed_point_residual(coeffs, 5.0)
    assert abs(d_mean) == 0.0 and abs(d_pair) == 0.0
    assert abs(d_occupation) < 1e-10

    with pytest.raises(ValueError):
        gibbs_fixed_point_residual(coeffs, 50.0)


def test_driven_run_dissipative_heat_matches_closure():
    green = green_flat(0.5, 1.0, TimeGrid(0.01, 1001))
    coeffs = build_coefficients(green, FlatSpectralDensity(0.5), EnvInitState())
    states, driven = driven_moments(GaussianModeState.vacuum(), green, MonochromaticDrive(0.3, 1.0), coeffs=coeffs)
    record = thermodynamics(driven, states)

    scale = float(np.max(np.abs(record.heat)))
    assert scale > 0
    assert record.first_law_residual < 1e-12
    assert record.dissipative_heat_residual / scale < 1e-4


def test_csv_columns(flat_thermal):
    _, _, record = flat_thermal
    columns = record.csv_columns()
    assert list(columns)[:4] == ["t", "U", "W", "Q"]
    assert not np.any(np.isnan(columns["beta_r"]))


def test_bundled_witness_scenario_shows_negative_entropy_production():
    scenario = load_scenario(SCENARIO_DIR / "simulate_witness.yaml").build()
    green = solve_green(scenario.spectral_density, scenario.omega0, scenario.grid, scenario.cutoff)
    coeffs = build_coefficients(green, scenario.spectral_density, scenario.environment, scenario.cutoff)
    record = thermodynamics(coeffs, propagate_closed_form(scenario.initial_state, green, coeffs))

    witness = non_markovian_witness(record, threshold=1e-6)
    assert witness is not None
    time, sigma = witness
    assert 0.0 < time <= scenario.grid.duration
    assert sigma < -1e-6

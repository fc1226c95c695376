"""
Tests for Gaussian-state propagation
"""

import numpy as np
import pytest

from physics import (
    DisplacedMode,
    EnvInitState,
    FlatSpectralDensity,
    GaussianModeState,
    LorentzianSpectralDensity,
    PositivityError,
    StepInstabilityError,
    TimeGrid,
    build_coefficients,
    fock_density_matrix,
    green_flat,
    green_lorentzian_closed,
    propagate_closed_form,
    propagate_exact,
    propagate_ode,
    random_gaussian_states,
    von_neumann_entropy,
)
from physics.dynamics import fock_entropy, integrate_rk4


def thermal_entropy(n):
    return (n + 1.0) * np.log(n + 1.0) - n * np.log(n)


def ladder(dimension):
    return np.diag(np.sqrt(np.arange(1, dimension)), k=1)


@pytest.fixture
def flat_displaced_run():
    J = FlatSpectralDensity(0.5)
    green = green_flat(0.5, 1.0, TimeGrid(0.01, 1001))
    env = EnvInitState(beta=1.0, displaced=(DisplacedMode(1.1, 0.2, 1.5),))
    state0 = GaussianModeState(0.4 - 0.2j, 0.1 + 0.05j, 0.6)
    return state0, green, build_coefficients(green, J, env), J, env


def test_state_constructors_and_symplectic_eigenvalue():
    coherent = GaussianModeState.coherent(1.0 + 2.0j)
    assert coherent.symplectic_eigenvalue == pytest.approx(0.5)
    assert GaussianModeState.thermal(0.7).symplectic_eigenvalue == pytest.approx(1.2)

    squeezed = GaussianModeState(0j, 0.3, 0.5)
    assert squeezed.symplectic_eigenvalue == pytest.approx(np.sqrt(1.0 - 0.09))
    with pytest.raises(ValueError):
        GaussianModeState.thermal(-0.1)


def test_entropy_of_pure_and_thermal_states():
    assert von_neumann_entropy(GaussianModeState.vacuum()) == pytest.approx(0.0, abs=1e-15)
    assert von_neumann_entropy(GaussianModeState.coherent(0.3j)) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(GaussianModeState.thermal(0.5)) == pytest.approx(thermal_entropy(0.5))


def test_random_states_are_physical_and_reproducible():
    states = random_gaussian_states(20, seed=3)

    assert len(states) == 20
    assert states == random_gaussian_states(20, seed=3)
    assert states != random_gaussian_states(20, seed=4)
    assert all(state.symplectic_eigenvalue >= 0.5 - 1e-12 for state in states)
    assert all(-1e-12 <= state.central_occupation <= 2.0 + 1e-12 for state in states)
    assert any(abs(state.central_pair) > 0.1 for state in states)


def test_unphysical_state_is_rejected():
    state = GaussianModeState(0j, 1.0, 0.0)
    with pytest.raises(PositivityError):
        state.check_positivity()
    with pytest.raises(PositivityError):
        von_neumann_entropy(state)


@pytest.mark.parametrize("state", [
    GaussianModeState.thermal(0.5),
    GaussianModeState(0j, 0.3, 0.5),
    GaussianModeState(0.4 - 0.2j, 0.1 + 0.05j, 0.6),
])
def test_fock_matrix_reproduces_moments_and_entropy(state):
    rho = fock_density_matrix(state, cutoff=64)
    a = ladder(64)

    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.trace(rho @ a) == pytest.approx(state.mean, abs=1e-6)
    assert np.trace(rho @ a @ a) == pytest.approx(state.pair, abs=1e-6)
    assert np.trace(rho @ a.T @ a).real == pytest.approx(state.occupation, abs=1e-6)
    assert fock_entropy(rho) == pytest.approx(von_neumann_entropy(state), abs=1e-6)


def test_closed_form_and_ode_agree(flat_displaced_run):
    state0, green, coeffs, _, _ = flat_displaced_run
    closed = propagate_closed_form(state0, green, coeffs)
    ode = propagate_ode(state0, coeffs)

    assert max(closed.max_deviation(ode).values()) < 1e-6
    assert closed.positivity_violation() is None


def test_exact_route_agrees_with_closed_form(flat_displaced_run):
    state0, green, coeffs, J, env = flat_displaced_run
    closed = propagate_closed_form(state0, green, coeffs)
    exact = propagate_exact(state0, green, J, env)

    assert max(closed.max_deviation(exact).values()) < 1e-14


def test_exact_route_crosses_zeros_of_green_function():
    grid = TimeGrid(0.01, 501)
    green = green_lorentzian_closed(5.0, 1.0, 1.0, 1.0, grid)
    J = LorentzianSpectralDensity(5.0, 1.0, 1.0)
    states = propagate_exact(GaussianModeState.coherent(1.0), green, J, EnvInitState())

    np.testing.assert_allclose(states.mean, green.values, atol=1e-14)
    np.testing.assert_allclose(states.occupation, np.abs(green.values) ** 2, atol=1e-14)


def test_vacuum_in_thermal_bath_tracks_noise():
    J = FlatSpectralDensity(0.5)
    green = green_flat(0.5, 1.0, TimeGrid(0.01, 301))
    coeffs = build_coefficients(green, J, EnvInitState(beta=1.0))
    states = propagate_closed_form(GaussianModeState.vacuum(), green, coeffs)

    assert np.all(states.mean == 0)
    assert np.all(states.pair == 0)
    np.testing.assert_allclose(states.occupation, coeffs.noise)


def test_zero_temperature_flat_bath_keeps_vacuum_pure():
    J = FlatSpectralDensity(0.5)
    green = green_flat(0.5, 1.0, TimeGrid(0.01, 301))
    coeffs = build_coefficients(green, J, EnvInitState())
    states = propagate_closed_form(GaussianModeState.vacuum(), green, coeffs)

    assert np.max(np.abs(states.entropy())) < 1e-8


def test_mismatched_grids_are_rejected(flat_displaced_run):
    state0, _, coeffs, _, _ = flat_displaced_run
    other = green_flat(0.5, 1.0, TimeGrid(0.02, 1001))
    with pytest.raises(ValueError):
        propagate_closed_form(state0, other, coeffs)


def test_rk4_integrates_linear_decay():
    times = np.linspace(0.0, 2.0, 201)
    solution = integrate_rk4(lambda t, y: -y, np.array([1.0 + 0j]), times)
    np.testing.assert_allclose(solution[:, 0].real, np.exp(-times), rtol=1e-8)


def test_rk4_gives_up_on_runaway_growth():
    times = np.linspace(0.0, 10.0, 11)
    with pytest.raises(StepInstabilityError):
        integrate_rk4(lambda t, y: 50.0 * y, np.array([1.0 + 0j]), times, max_refinements=2)


def test_series_csv_columns():
    green = green_flat(0.5, 1.0, TimeGrid(0.1, 11))
    coeffs = build_coefficients(green, FlatSpectralDensity(0.5), EnvInitState())
    states = propagate_closed_form(GaussianModeState.coherent(0.5), green, coeffs)
    assert list(states.csv_columns()) == ["t", "re_a", "im_a", "re_aa", "im_aa", "n", "S"]
    assert states.final.mean == pytest.approx(0.5 * green.values[-1])

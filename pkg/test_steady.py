"""
Tests for steady states, the NESS and the resonance sweep
"""

import numpy as np
import pytest

from config import parse_scenario
from physics import (
    DisplacedMode,
    EnvInitState,
    FlatSpectralDensity,
    GaussianModeState,
    LorentzianSpectralDensity,
    SteadyState,
    TimeGrid,
    UnsupportedVariantError,
    build_coefficients,
    green_flat,
    green_laplace,
    ness_fluxes_single_mode,
    ness_state,
    propagate_closed_form,
    resonance_sweep,
    steady_excitation,
    steady_state,
)
from physics.steady import decayed_index
from pipelines import PipelineResult, ScenarioPipelines


def test_lorentzian_weight_is_normalized():
    J = LorentzianSpectralDensity(gamma0=0.1, eta=0.5, omega_c=1.0)
    occupation, normalization = steady_excitation(J, 1.0, np.inf)
    assert occupation == 0.0
    assert normalization == pytest.approx(1.0, abs=1e-7)


def test_flat_weight_is_a_truncated_lorentzian():
    J = FlatSpectralDensity(0.5)
    _, normalization = steady_excitation(J, 1.0, np.inf)
    expected = (np.arctan(19.0 / 0.25) + np.arctan(21.0 / 0.25)) / np.pi
    assert normalization == pytest.approx(expected, rel=1e-8)


def test_steady_state_from_limits_is_gibbs():
    steady = SteadyState.from_limits(0.3, 1.2, 0.5)
    assert steady.gibbs_occupation == pytest.approx(0.3, rel=1e-12)
    assert steady.beta_r * steady.omega_r == pytest.approx(np.log1p(1.0 / 0.3))

    cold = SteadyState.from_limits(0.0, 1.0, 0.5)
    assert cold.gibbs_occupation == 0.0
    with pytest.raises(ValueError):
        SteadyState(0.3, 1.0, 1.0, 0.5, 5.0)


def test_steady_state_from_coefficients():
    green = green_flat(1.0, 1.0, TimeGrid.spanning(40.0, 0.05))
    coeffs = build_coefficients(green, FlatSpectralDensity(1.0), EnvInitState(beta=1.0))
    steady = steady_state(coeffs)

    assert steady.omega_r == pytest.approx(1.0)
    assert steady.gamma == pytest.approx(1.0)
    assert steady.occupation == pytest.approx(coeffs.noise[-1])


def test_decayed_index():
    green = green_flat(1.0, 1.0, TimeGrid(0.1, 400))
    assert decayed_index(green) == 277
    assert decayed_index(green_flat(1.0, 1.0, TimeGrid(0.1, 100))) is None


@pytest.fixture
def flat_ness():
    J = FlatSpectralDensity(0.5)
    occupation, _ = steady_excitation(J, 1.0, 1.0)
    steady = SteadyState.from_limits(occupation, 1.0, 0.5)
    mode = DisplacedMode(omega=1.2, coupling=0.3, alpha=2.0)
    return J, steady, mode, ness_state(J, 1.0, [mode], steady, np.linspace(0.0, 20.0, 201))


def test_ness_phasor_and_fluxes(flat_ness):
    _, steady, mode, ness = flat_ness
    phi = 0.6 / (1j * (1.0 - 1.2) + 0.25)

    assert ness.phis[0] == pytest.approx(phi)
    assert ness.unitarity_residual < 1e-10
    assert ness.fluxes.heat_rate == pytest.approx(-ness.fluxes.work_rate)
    assert ness.fluxes.entropy_production_rate == pytest.approx(
        steady.beta_r * steady.gamma * mode.omega * abs(phi) ** 2
    )
    assert ness.fluxes.entropy_production_rate > 0


def test_ness_report_keys(flat_ness):
    _, _, _, ness = flat_ness
    report = ness.report()
    assert {"phi", "nbar", "Qdot", "Wdot", "sigmadot", "unitarity_residual"} <= set(report)
    assert list(ness.csv_columns()) == ["t", "re_Fbar", "im_Fbar", "re_fbar", "im_fbar", "Ubar"]


def test_constant_fluxes_need_a_single_mode(flat_ness):
    J, steady, mode, ness = flat_ness
    other = DisplacedMode(omega=0.8, coupling=0.2, alpha=1.0)
    laplace = green_laplace(J, 1.0, np.array([1.2, 0.8]))
    with pytest.raises(UnsupportedVariantError):
        ness_fluxes_single_mode(np.ones(2), [mode, other], laplace, steady)

    two_modes = ness_state(J, 1.0, [mode, other], steady, np.linspace(0.0, 5.0, 11))
    assert two_modes.fluxes is None
    assert two_modes.unitarity_residual < 1e-10


def test_resonance_sweep_peaks_at_the_root():
    J = FlatSpectralDensity(0.1)
    steady = SteadyState.from_limits(0.5, 1.0, 0.1)
    sweep = resonance_sweep(J, 1.0, 0.3, 2.0, np.linspace(0.5, 1.5, 101), steady)

    assert sweep.root_frequency == pytest.approx(1.0, abs=1e-9)
    assert abs(sweep.peak_frequency - sweep.root_frequency) <= sweep.grid_step + 1e-12
    assert len(sweep.rows()) == 101


@pytest.fixture(scope="module")
def driven_relaxation():
    J = FlatSpectralDensity(0.05)
    mode = DisplacedMode(omega=1.05, coupling=0.05, alpha=2.0)
    green = green_flat(0.05, 1.0, TimeGrid.spanning(600.0, 0.05))
    coeffs = build_coefficients(green, J, EnvInitState(beta=1.0, displaced=(mode,)))
    states = propagate_closed_form(GaussianModeState.vacuum(), green, coeffs)
    steady = steady_state(coeffs)
    return green, coeffs, states, steady, ness_state(J, 1.0, [mode], steady, green.times)


def test_transient_settles_on_the_displaced_gibbs_state(driven_relaxation):
    green, _, states, steady, ness = driven_relaxation
    index = decayed_index(green, 1e-6)
    assert index is not None

    assert np.max(np.abs(ness.displacement)) > 0.1
    assert np.max(np.abs(states.mean[index:] - ness.displacement[index:])) < 1e-3
    expected_occupation = steady.occupation + np.abs(ness.displacement[index:]) ** 2
    assert np.max(np.abs(states.occupation[index:] - expected_occupation)) < 1e-3


def test_closed_form_force_matches_the_driven_tail(driven_relaxation):
    green, coeffs, _, _, ness = driven_relaxation
    index = decayed_index(green, 1e-6)

    assert np.max(np.abs(ness.force)) > 1e-2
    assert np.max(np.abs(coeffs.force[index:] - ness.force[index:])) < 1e-3


def test_ness_pipeline_reports_the_force_tail():
    config = parse_scenario(
        "name: light-ness\npipeline: ness\nspectral_density:\n  kind: flat\n  gamma0: 0.5\n"
        "grid:\n  dt: 0.05\n  duration: 60.0\nenvironment:\n  beta: 1.0\n  displaced:\n"
        "    - omega: 1.1\n      coupling: 0.2\n      alpha: [1.0, 0.0]\n"
    )
    result = ScenarioPipelines.ness(config.build(), PipelineResult("ness"))

    assert result.checks["ness_force"]["passed"]
    assert result.checks["ness_convergence"]["passed"]
    assert result.derived["ness_force_gap"] < 1e-3

"""
Tests for the reaction-coordinate mapping
"""

import numpy as np
import pytest

from physics import (
    FlatSpectralDensity,
    GaussianModeState,
    LorentzianSpectralDensity,
    RcModel,
    TimeGrid,
    UnsupportedVariantError,
    compare_exact_vs_rc,
    map_lorentzian,
    simulate_rc,
)
from physics.quadrature import planck
from physics.rcmap import map_spectral_density, rc_deviation_scan, rc_steady_occupation

STATE0 = GaussianModeState(0.5 + 0.2j, 0.1j, 0.5)


def test_mapping_constants():
    model = map_lorentzian(0.2, 0.5, 1.0, beta=1.0)
    assert model.coupling == pytest.approx(np.sqrt(0.05))
    assert model.omega_rc == 1.0
    assert model.residual_rate == pytest.approx(1.0)
    assert model.w_plus == pytest.approx(planck(1.0, 1.0))
    assert model.w_minus - model.w_plus == pytest.approx(1.0)
    assert model.rc_occupation == pytest.approx(planck(1.0, 1.0))


def test_zero_temperature_mapping_has_no_absorption():
    model = map_lorentzian(0.2, 0.5, 1.0, beta=np.inf)
    assert model.w_plus == 0.0
    assert model.w_minus == pytest.approx(1.0)


def test_inconsistent_rates_are_rejected():
    with pytest.raises(ValueError):
        RcModel(coupling=0.1, omega_rc=1.0, residual_rate=1.0, w_plus=0.2, w_minus=0.5, beta=1.0)
    with pytest.raises(ValueError):
        RcModel(coupling=0.1, omega_rc=1.0, residual_rate=1.0, w_plus=-0.1, w_minus=0.9, beta=1.0)
    with pytest.raises(ValueError):
        map_lorentzian(0.2, 0.0, 1.0, beta=1.0)


def test_only_lorentzians_map():
    with pytest.raises(UnsupportedVariantError):
        map_spectral_density(FlatSpectralDensity(0.5), beta=1.0)


@pytest.mark.parametrize("omega0", [0.6, 1.0, 1.7])
def test_rc_steady_state_inherits_rc_temperature(omega0):
    model = map_lorentzian(0.3, 0.4, 1.1, beta=2.0)
    assert rc_steady_occupation(model, omega0) == pytest.approx(planck(1.1, 2.0), rel=1e-10)


def test_rc_route_is_exact_at_zero_temperature():
    J = LorentzianSpectralDensity(0.1, 0.5, 1.0)
    comparison = compare_exact_vs_rc(J, 1.0, np.inf, STATE0, TimeGrid.spanning(20.0, 0.01))
    assert comparison.worst_relative < 1e-6
    assert set(comparison.report()) == {"eta", "gamma0", "max_abs", "l2", "relative"}


def test_rc_route_mean_is_exact_at_finite_temperature():
    J = LorentzianSpectralDensity(0.1, 0.5, 1.0)
    comparison = compare_exact_vs_rc(J, 1.0, 1.0, STATE0, TimeGrid.spanning(20.0, 0.01))
    assert comparison.relative["mean"] < 1e-6


def test_two_mode_state_stays_physical():
    model = map_lorentzian(0.3, 0.5, 1.0, beta=1.0)
    trajectory = simulate_rc(model, 1.0, STATE0, TimeGrid.spanning(10.0, 0.01))

    assert np.min(trajectory.min_symplectic) >= 0.5 - 1e-9
    assert trajectory.rc_occupation[0] == pytest.approx(model.rc_occupation)
    assert {"n_rc", "nu_min"} <= set(trajectory.csv_columns())


def test_deviation_scan_arguments():
    with pytest.raises(ValueError):
        rc_deviation_scan([0.5], 1.0, 1.0, np.inf, STATE0, 5.0, 0.01)
    with pytest.raises(ValueError):
        rc_deviation_scan([0.5], 1.0, 1.0, np.inf, STATE0, 5.0, 0.01, gamma0=0.1, coupling_product=0.05)

    results = rc_deviation_scan([0.5, 1.0], 1.0, 1.0, np.inf, STATE0, 5.0, 0.01, coupling_product=0.05)
    assert [r.gamma0 for r in results] == pytest.approx([0.1, 0.05])
    assert all(r.worst_relative < 1e-6 for r in results)


@pytest.mark.slow
def test_rc_deviation_shrinks_with_the_width():
    results = rc_deviation_scan([0.2, 0.1, 0.05, 0.02], 1.0, 1.0, 1.0, GaussianModeState.coherent(1.0),
                                20.0, 0.01, gamma0=0.5)
    worst = [r.worst_relative for r in results]

    assert [r.eta for r in results] == [0.2, 0.1, 0.05, 0.02]
    assert all(later <= earlier for earlier, later in zip(worst, worst[1:]))
    assert worst[-1] <= 5e-2

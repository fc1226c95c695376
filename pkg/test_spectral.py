"""
Tests for spectral density models
"""

import logging

import numpy as np
import pytest

from physics import (
    DiscreteSpectralDensity,
    FlatSpectralDensity,
    FrequencyCutoff,
    LorentzianSpectralDensity,
    TabulatedSpectralDensity,
    UnsupportedVariantError,
)
from physics.spectral import DiracKernel

HALF_AXIS = FrequencyCutoff(omega_max=20.0, use_full_real_axis=False)


def half_axis_lorentzian_shift(J, omega, upper):
    """P∫_0^upper J(ω′)/(ω − ω′) dω′ in closed form."""
    amplitude = J.gamma0 / (2.0 * np.pi)
    d = omega - J.omega_c
    u1, u2 = -J.omega_c, upper - J.omega_c
    bracket = ((d / J.eta) * (np.arctan(u2 / J.eta) - np.arctan(u1 / J.eta))
               + 0.5 * np.log((u2 ** 2 + J.eta ** 2) / (u1 ** 2 + J.eta ** 2))
               - np.log(abs(d - u2)) + np.log(abs(d - u1)))
    return amplitude * J.eta ** 2 / (d ** 2 + J.eta ** 2) * bracket


def test_flat_density_has_dirac_kernel_and_no_shift():
    J = FlatSpectralDensity(0.4)
    cutoff = FrequencyCutoff()

    kernel = J.memory_kernel(np.linspace(0.0, 1.0, 5), cutoff)
    assert isinstance(kernel, DiracKernel)
    assert kernel.weight == pytest.approx(0.4)
    assert J.lamb_shift(1.3, cutoff) == 0.0
    assert J.kernel_laplace(0.7, cutoff) == pytest.approx(0.2)
    assert J.evaluate(5.0) == pytest.approx(0.4 / (2.0 * np.pi))


def test_lorentzian_closed_forms_on_full_axis():
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.3, omega_c=1.0)
    cutoff = FrequencyCutoff()
    t = np.array([0.0, 0.5, 2.0])

    expected = 0.5 * 0.5 * 0.3 * np.exp(-(0.3 + 1j) * t)
    assert np.allclose(J.memory_kernel(t, cutoff), expected, rtol=1e-14)
    assert J.total_weight(cutoff) == pytest.approx(0.075)
    # Δ(ω) changes sign across the center
    assert J.lamb_shift(1.2, cutoff) > 0 > J.lamb_shift(0.8, cutoff)
    assert J.kernel_laplace(1.0, cutoff).real == pytest.approx(np.pi * J.evaluate(1.0))


def test_half_axis_kernel_at_zero_equals_weight():
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.3, omega_c=1.0)
    amplitude = J.gamma0 * J.eta / (2.0 * np.pi)
    expected = amplitude * (np.arctan((20.0 - 1.0) / 0.3) - np.arctan(-1.0 / 0.3))

    assert J.memory_kernel(0.0, HALF_AXIS).real == pytest.approx(expected, rel=1e-9)
    assert J.total_weight(HALF_AXIS) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("omega", [0.4, 0.9, 1.3, 2.5])
def test_principal_value_shift_matches_closed_form(omega):
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.3, omega_c=1.0)
    value = J.lamb_shift(omega, HALF_AXIS)
    assert value == pytest.approx(half_axis_lorentzian_shift(J, omega, 20.0), rel=1e-7, abs=1e-10)


def test_negative_axis_weight():
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.3, omega_c=1.0)
    full = J.total_weight(FrequencyCutoff(omega_max=1e6))
    half = J.gamma0 * J.eta / (2.0 * np.pi) * (np.pi / 2.0 + np.arctan(J.omega_c / J.eta))
    assert J.negative_axis_weight() == pytest.approx(full - half, rel=1e-9)


def test_scaling_multiplies_density_by_lambda_squared():
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.3, omega_c=1.0)
    scaled = J.scaled(0.1)
    assert scaled.evaluate(1.1) == pytest.approx(0.01 * J.evaluate(1.1))
    assert FlatSpectralDensity(2.0).scaled(0.5).gamma0 == pytest.approx(0.5)


def test_discretization_preserves_total_weight():
    J = FlatSpectralDensity(0.5)
    cutoff = FrequencyCutoff(omega_max=20.0)
    bath = J.discretize(1000, cutoff)

    assert bath.frequencies.size == 1000
    assert bath.spacing == pytest.approx(0.04)
    assert bath.total_weight() == pytest.approx(J.total_weight(cutoff), rel=1e-12)
    assert bath.recurrence_time == pytest.approx(2.0 * np.pi / 0.04)


def test_coarse_discretization_is_logged(caplog):
    J = LorentzianSpectralDensity(gamma0=0.5, eta=0.05, omega_c=1.0)
    with caplog.at_level(logging.WARNING):
        J.discretize(100, FrequencyCutoff())
    assert "fewer than 8 modes" in caplog.text


def test_discrete_bath_kernel_and_restrictions():
    bath = DiscreteSpectralDensity(frequencies=[1.0, 2.0], couplings=[0.3, 0.4j])

    assert bath.memory_kernel(0.0) == pytest.approx(0.25)
    t = 0.7
    expected = 0.09 * np.exp(-1j * t) + 0.16 * np.exp(-2j * t)
    assert bath.memory_kernel(t) == pytest.approx(expected)

    with pytest.raises(UnsupportedVariantError):
        bath.evaluate(1.0)
    with pytest.raises(UnsupportedVariantError):
        bath.lamb_shift(1.0)
    with pytest.raises(ValueError):
        DiscreteSpectralDensity(frequencies=[-1.0, 2.0], couplings=[0.1, 0.1])


def test_tabulated_density_interpolates_and_vanishes_outside():
    frequencies = np.linspace(0.0, 4.0, 41)
    J = TabulatedSpectralDensity(frequencies, 0.1 * frequencies, order=1)

    assert J.evaluate(1.25) == pytest.approx(0.125)
    assert J.evaluate(5.0) == 0.0
    assert J.support(FrequencyCutoff()) == (0.0, 4.0)


def test_tabulated_density_rejects_bad_tables():
    with pytest.raises(ValueError):
        TabulatedSpectralDensity([0.0, 1.0, 1.0, 2.0, 3.0], [0.0, 1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        TabulatedSpectralDensity([0.0, 1.0, 2.0, 3.0, 4.0], [0.0, -1.0, 1.0, 1.0, 1.0])


def test_tabulated_density_from_csv(tmp_path):
    path = tmp_path / "density.csv"
    rows = "\n".join(f"{w},{0.2 * w}" for w in np.linspace(0.0, 2.0, 9))
    path.write_text("# omega,J\n" + rows + "\n")

    J = TabulatedSpectralDensity.from_csv(path, order=1)
    assert J.evaluate(1.0) == pytest.approx(0.2)


def test_cutoff_validation():
    with pytest.raises(ValueError):
        FrequencyCutoff(omega_max=-1.0)
    with pytest.raises(ValueError):
        FrequencyCutoff(omega_max=1.0, omega_min=2.0)
    assert FrequencyCutoff(use_full_real_axis=False).support == (0.0, 20.0)

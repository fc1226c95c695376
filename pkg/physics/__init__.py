"""
Physics package initialization
"""

from .coefficients import (
    CoefficientSeries,
    DisplacedMode,
    EnvInitState,
    SemiclassicalMode,
    SqueezedMode,
    bath_excitation,
    build_coefficients,
    displacement_series,
    markov_limit,
    noise_integral,
    omega_gamma,
    second_order_lorentzian,
    semiclassical_limit,
    semiclassical_scaling,
    squeeze_series,
)
from .driving import (
    ConstantDrive,
    DrivingProtocol,
    GaussianPulse,
    MonochromaticDrive,
    SampledDrive,
    driven_moments,
    renormalized_force,
    renormalized_force_rates,
)
from .dynamics import (
    GaussianModeState,
    StateSeries,
    fock_density_matrix,
    moment_rates,
    propagate_closed_form,
    propagate_exact,
    propagate_ode,
    random_gaussian_states,
    von_neumann_entropy,
)
from .errors import (
    FanoError,
    PositivityError,
    QuadratureError,
    RedirectError,
    StepInstabilityError,
    UnsupportedVariantError,
    ZeroCrossingError,
)
from .green import (
    GreenFunction,
    TimeGrid,
    green_flat,
    green_laplace,
    green_lorentzian_closed,
    green_second_order,
    locate_zero_crossings,
    solve_green,
    solve_volterra,
    volterra_convergence,
)
from .oracle import (
    DiscreteBathScenario,
    one_particle_propagator,
    oracle_global_gibbs_expectation,
    oracle_green,
    oracle_moments,
)
from .rcmap import RcModel, compare_exact_vs_rc, map_lorentzian, simulate_rc
from .spectral import (
    DiscreteSpectralDensity,
    FlatSpectralDensity,
    FrequencyCutoff,
    LorentzianSpectralDensity,
    SpectralDensity,
    TabulatedSpectralDensity,
)
from .steady import (
    NessState,
    SteadyState,
    ness_displacement,
    ness_fluxes_single_mode,
    ness_force,
    ness_state,
    resonance_sweep,
    steady_excitation,
    steady_state,
    verify_ness_unitarity,
)
from .thermo import (
    ThermoRecord,
    gibbs_fixed_point_residual,
    non_markovian_witness,
    thermodynamics,
)

__all__ = [
    'SpectralDensity', 'FlatSpectralDensity', 'LorentzianSpectralDensity',
    'DiscreteSpectralDensity', 'TabulatedSpectralDensity', 'FrequencyCutoff',
    'TimeGrid', 'GreenFunction', 'solve_volterra', 'solve_green', 'green_flat',
    'green_lorentzian_closed', 'green_laplace', 'green_second_order', 'locate_zero_crossings', 'volterra_convergence',
    'EnvInitState', 'DisplacedMode', 'SqueezedMode', 'SemiclassicalMode', 'CoefficientSeries',
    'omega_gamma', 'noise_integral', 'bath_excitation', 'displacement_series', 'squeeze_series',
    'build_coefficients', 'markov_limit', 'second_order_lorentzian', 'semiclassical_limit',
    'semiclassical_scaling',
    'GaussianModeState', 'StateSeries', 'propagate_closed_form', 'propagate_exact', 'propagate_ode',
    'moment_rates', 'random_gaussian_states',
    'von_neumann_entropy', 'fock_density_matrix',
    'ThermoRecord', 'thermodynamics', 'gibbs_fixed_point_residual', 'non_markovian_witness',
    'SteadyState', 'NessState', 'steady_excitation', 'steady_state', 'ness_displacement', 'ness_force',
    'ness_fluxes_single_mode', 'verify_ness_unitarity', 'resonance_sweep', 'ness_state',
    'DrivingProtocol', 'ConstantDrive', 'MonochromaticDrive', 'GaussianPulse', 'SampledDrive',
    'renormalized_force', 'renormalized_force_rates', 'driven_moments',
    'RcModel', 'map_lorentzian', 'simulate_rc', 'compare_exact_vs_rc',
    'DiscreteBathScenario', 'one_particle_propagator', 'oracle_green', 'oracle_moments',
    'oracle_global_gibbs_expectation',
    'FanoError', 'ZeroCrossingError', 'PositivityError', 'UnsupportedVariantError',
    'RedirectError', 'QuadratureError', 'StepInstabilityError',
]

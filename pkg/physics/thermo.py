"""
First-law ledger, renormalized temperature and entropy production
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .coefficients import CoefficientSeries
from .dynamics import StateSeries, moment_rates
from .quadrature import cumulative, cumulative_corrected

logger = logging.getLogger(__name__)

ENTROPY_FLOOR = 1e-15
WITNESS_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class ThermoRecord:
    """Thermodynamic series of the central mode on the coefficient grid."""

    times: np.ndarray
    internal_energy: np.ndarray
    work: np.ndarray
    heat: np.ndarray
    work_rate: np.ndarray
    heat_in: np.ndarray
    heat_out: np.ndarray
    dissipative_heat_rate: np.ndarray
    dissipative_heat: np.ndarray
    beta_r: np.ndarray
    beta_r_defined: np.ndarray
    entropy: np.ndarray
    entropy_rate: np.ndarray
    entropy_production: np.ndarray
    entropy_production_rate: np.ndarray
    coverage: float

    @property
    def first_law_residual(self) -> float:
        """max |ΔU − W − Q| / max(1, max|ΔU|)."""
        delta_u = self.internal_energy - self.internal_energy[0]
        scale = max(1.0, float(np.max(np.abs(delta_u))))
        return float(np.max(np.abs(delta_u - self.work - self.heat)) / scale)

    @property
    def heat_split_residual(self) -> float:
        """
        Gap between the closure heat and the integrated heat-rate split.

        Only meaningful without coherent forcing; the force adds γ Im(f⟨a⟩*)
        to dQ/dt, which the split leaves out.
        """
        split = cumulative_corrected(self.heat_in - self.heat_out, self.times[1] - self.times[0])
        return float(np.max(np.abs(split - self.heat)))

    @property
    def dissipative_heat_residual(self) -> float:
        return float(np.max(np.abs(self.dissipative_heat - self.heat)))

    def csv_columns(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.times,
            "U": self.internal_energy,
            "W": self.work,
            "Q": self.heat,
            "Qdot_in": self.heat_in,
            "Qdot_out": self.heat_out,
            "beta_r": np.nan_to_num(self.beta_r, nan=0.0),
            "beta_r_defined": self.beta_r_defined.astype(int),
            "S": self.entropy,
            "Sigma": self.entropy_production,
            "sigma": np.nan_to_num(self.entropy_production_rate, nan=0.0),
        }


def _drive_term(force: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """i f⟨a⟩* − i f*⟨a⟩ for arrays of equal shape."""
    return -2.0 * np.imag(force * np.conj(mean))


def internal_energy(coeffs: CoefficientSeries, states: StateSeries) -> np.ndarray:
    """U_S = ω_r⟨a†a⟩ + i f⟨a⟩* − i f*⟨a⟩."""
    return coeffs.omega_r * states.occupation + _drive_term(coeffs.force, states.mean)


def work(coeffs: CoefficientSeries, states: StateSeries) -> np.ndarray:
    """
    Cumulative work ∫ Tr{K̇_S ρ_S}.

    Parameter increments are weighted by the state averaged over each step, the
    discrete product rule, so ΔU − W leaves exactly the state-change part. The
    rule misses Δt²/12 ∫(ẏẍ − ÿẋ) for a parameter x weighting a moment y; that
    term is added back, leaving an O(Δt⁴) error in W and in the closure heat.
    """
    dt = coeffs.grid.dt
    d_omega = np.diff(coeffs.omega_r)
    d_force = np.diff(coeffs.force)
    mean_occupation = 0.5 * (states.occupation[1:] + states.occupation[:-1])
    mean_amplitude = 0.5 * (states.mean[1:] + states.mean[:-1])
    increments = d_omega * mean_occupation + _drive_term(d_force, mean_amplitude)

    omega_1, omega_2 = _derivatives(coeffs.omega_r, dt)
    occupation_1, occupation_2 = _derivatives(states.occupation, dt)
    force_1, force_2 = _derivatives(coeffs.force, dt)
    mean_1, mean_2 = _derivatives(states.mean, dt)
    bias = (occupation_1 * omega_2 - occupation_2 * omega_1
            + _drive_term(force_2, mean_1) - _drive_term(force_1, mean_2))
    return np.concatenate([[0.0], np.cumsum(increments)]) + dt * dt / 12.0 * cumulative(bias, dt)


def _derivatives(series: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    first = np.gradient(series, dt, edge_order=2)
    return first, np.gradient(first, dt, edge_order=2)


def work_rate(coeffs: CoefficientSeries, states: StateSeries) -> np.ndarray:
    dt = coeffs.grid.dt
    omega_dot = np.gradient(coeffs.omega_r, dt, edge_order=2)
    force_dot = np.gradient(coeffs.force, dt, edge_order=2)
    return omega_dot * states.occupation + _drive_term(force_dot, states.mean)


def dissipative_heat_rate(coeffs: CoefficientSeries, states: StateSeries) -> np.ndarray:
    """Tr{K_S D_t[ρ]} = ω_r(γN − γn) − (γ/2)(i f⟨a⟩* − i f*⟨a⟩)."""
    gamma = coeffs.gamma
    return (coeffs.omega_r * (coeffs.gamma_excitation - gamma * states.occupation)
            - 0.5 * gamma * _drive_term(coeffs.force, states.mean))


def heat(coeffs: CoefficientSeries, states: StateSeries,
         energy: Optional[np.ndarray] = None,
         cumulative_work: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closure heat Q = ΔU − W with the rates Q̇_in = ω_rγN and Q̇_out = ω_rγn."""
    if energy is None:
        energy = internal_energy(coeffs, states)
    if cumulative_work is None:
        cumulative_work = work(coeffs, states)
    closure = energy - energy[0] - cumulative_work
    heat_in = coeffs.omega_r * coeffs.gamma_excitation
    heat_out = coeffs.omega_r * coeffs.gamma * states.occupation
    return closure, heat_in, heat_out


def renormalized_temperature(coeffs: CoefficientSeries) -> Tuple[np.ndarray, np.ndarray]:
    """β_r = ln((N+1)/N)/ω_r; samples with undefined or nonpositive N are NaN and flagged."""
    excitation = coeffs.excitation
    omega_r = coeffs.omega_r
    with np.errstate(invalid="ignore"):
        defined = coeffs.excitation_defined & (excitation > 0) & (omega_r > 0)
    beta_r = np.full(excitation.shape, np.nan)
    beta_r[defined] = np.log1p(1.0 / excitation[defined]) / omega_r[defined]
    negative = coeffs.excitation_defined & ~(excitation > 0)
    if np.any(negative[1:]):
        first = np.flatnonzero(negative[1:])[0] + 1
        logger.warning("N(t) is nonpositive at t = %.6g; β_r undefined there", coeffs.times[first])
    return beta_r, defined


def entropy_rate(coeffs: CoefficientSeries, states: StateSeries) -> np.ndarray:
    """dS/dt = ln((ν+½)/(ν−½))·dν/dt with dν/dt from the moment equations."""
    d_mean, d_pair, d_occupation = moment_rates(
        states.mean, states.pair, states.occupation, coeffs.omega_r, coeffs.gamma,
        coeffs.gamma_excitation, coeffs.force, coeffs.squeeze_drive,
    )
    central_n = states.occupation - np.abs(states.mean) ** 2
    central_p = states.pair - states.mean ** 2
    d_central_n = d_occupation - 2.0 * np.real(np.conj(states.mean) * d_mean)
    d_central_p = d_pair - 2.0 * states.mean * d_mean

    nu = np.maximum(states.symplectic_eigenvalues, 0.5)
    d_nu = ((central_n + 0.5) * d_central_n - np.real(np.conj(central_p) * d_central_p)) / nu
    slope = np.log((nu + 0.5) / np.maximum(nu - 0.5, ENTROPY_FLOOR))
    return slope * d_nu


def entropy_production(states: StateSeries, heat_rate: np.ndarray, beta_r: np.ndarray,
                       beta_r_defined: np.ndarray, entropy_rate_series: np.ndarray,
                       dt: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Σ = ΔS − ∫β_r Q̇ and σ = Ṡ − β_r Q̇.

    Samples with undefined β_r contribute nothing to the integral; the
    returned coverage is the defined fraction.
    """
    entropy = states.entropy()
    flux = np.where(beta_r_defined, np.nan_to_num(beta_r) * heat_rate, 0.0)
    total = entropy - entropy[0] - cumulative(flux, dt)
    rate = np.where(beta_r_defined, entropy_rate_series - np.nan_to_num(beta_r) * heat_rate, np.nan)
    coverage = float(np.count_nonzero(beta_r_defined)) / max(len(beta_r_defined), 1)
    return total, rate, coverage


def thermodynamics(coeffs: CoefficientSeries, states: StateSeries) -> ThermoRecord:
    """Assemble the full thermodynamic record for one trajectory."""
    dt = coeffs.grid.dt
    energy = internal_energy(coeffs, states)
    cumulative_work = work(coeffs, states)
    closure, heat_in, heat_out = heat(coeffs, states, energy, cumulative_work)
    q_rate = dissipative_heat_rate(coeffs, states)
    beta_r, defined = renormalized_temperature(coeffs)
    s_rate = entropy_rate(coeffs, states)
    total, rate, coverage = entropy_production(states, q_rate, beta_r, defined, s_rate, dt)

    return ThermoRecord(
        times=coeffs.times,
        internal_energy=energy,
        work=cumulative_work,
        heat=closure,
        work_rate=work_rate(coeffs, states),
        heat_in=heat_in,
        heat_out=heat_out,
        dissipative_heat_rate=q_rate,
        dissipative_heat=cumulative(q_rate, dt),
        beta_r=beta_r,
        beta_r_defined=defined,
        entropy=states.entropy(),
        entropy_rate=s_rate,
        entropy_production=total,
        entropy_production_rate=rate,
        coverage=coverage,
    )


def non_markovian_witness(record: ThermoRecord,
                          threshold: float = WITNESS_THRESHOLD) -> Optional[Tuple[float, float]]:
    """First (time, σ) with σ below −threshold, or None."""
    rate = record.entropy_production_rate
    with np.errstate(invalid="ignore"):
        hits = np.flatnonzero(rate < -threshold)
    if hits.size == 0:
        return None
    return float(record.times[hits[0]]), float(rate[hits[0]])


def gibbs_fixed_point_residual(coeffs: CoefficientSeries,
                               t: float) -> Optional[Tuple[complex, complex, float]]:
    """Moment-equation rates at (0, 0, N(t)); None where N is undefined."""
    index = int(round(t / coeffs.grid.dt))
    if not 0 <= index < coeffs.grid.steps:
        raise ValueError(f"t = {t} lies outside the coefficient grid")
    if not coeffs.excitation_defined[index]:
        logger.warning("N undefined at t = %.6g; Gibbs residual skipped", coeffs.times[index])
        return None
    d_mean, d_pair, d_occupation = _gibbs_rates(coeffs, slice(index, index + 1))
    return complex(d_mean[0]), complex(d_pair[0]), float(d_occupation[0])


def gibbs_residual_max(coeffs: CoefficientSeries) -> float:
    """Largest Gibbs fixed-point residual over all samples with N defined."""
    defined = np.flatnonzero(coeffs.excitation_defined)
    if defined.size == 0:
        return 0.0
    d_mean, d_pair, d_occupation = _gibbs_rates(coeffs, defined)
    return float(max(np.max(np.abs(d_mean)), np.max(np.abs(d_pair)), np.max(np.abs(d_occupation))))


def _gibbs_rates(coeffs: CoefficientSeries, index):
    excitation = coeffs.excitation[index]
    zeros = np.zeros(excitation.shape, dtype=complex)
    return moment_rates(
        zeros, zeros, excitation, coeffs.omega_r[index], coeffs.gamma[index],
        coeffs.gamma_excitation[index], coeffs.force[index], coeffs.squeeze_drive[index],
    )

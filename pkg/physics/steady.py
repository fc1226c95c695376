"""
Equilibrium and nonequilibrium steady states with their constant fluxes
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .coefficients import CoefficientSeries, DisplacedMode
from .dynamics import moment_rates
from .errors import FanoError, UnsupportedVariantError
from .green import GreenFunction, green_laplace
from .quadrature import planck
from .spectral import FrequencyCutoff, LorentzianSpectralDensity, SpectralDensity

logger = logging.getLogger(__name__)

DECAYED_THRESHOLD = 1e-6
NORMALIZATION_TOLERANCE = 1e-3


@dataclass(frozen=True)
class SteadyState:
    """Long-time limits: occupation n̄, Gibbs exponent X and the coefficient limits."""

    occupation: float
    exponent: float
    omega_r: float
    gamma: float
    beta_r: float

    def __post_init__(self):
        if self.occupation < 0:
            raise ValueError(f"Steady occupation must be nonnegative, got {self.occupation}")
        if np.isfinite(self.exponent) and abs(self.beta_r * self.omega_r - self.exponent) > 1e-9 * max(1.0, self.exponent):
            raise ValueError("β̄_r ω̄_r must equal the Gibbs exponent")

    @classmethod
    def from_limits(cls, occupation: float, omega_r: float, gamma: float) -> "SteadyState":
        exponent = np.log1p(1.0 / occupation) if occupation > 0 else np.inf
        return cls(float(occupation), float(exponent), float(omega_r), float(gamma), float(exponent / omega_r))

    @property
    def gibbs_occupation(self) -> float:
        """1/(e^{β̄_r ω̄_r} − 1)."""
        return 0.0 if np.isinf(self.exponent) else float(1.0 / np.expm1(self.beta_r * self.omega_r))


def steady_state(coeffs: CoefficientSeries) -> SteadyState:
    """SteadyState from the last sample of a decayed coefficient series."""
    return SteadyState.from_limits(max(float(coeffs.noise[-1]), 0.0), coeffs.omega_r[-1], coeffs.gamma[-1])


def decayed_index(green: GreenFunction, threshold: float = DECAYED_THRESHOLD) -> Optional[int]:
    """First sample after which |G| stays below ``threshold``."""
    above = np.flatnonzero(np.abs(green.values) >= threshold)
    if above.size == 0:
        return 0
    index = above[-1] + 1
    return int(index) if index < green.grid.steps else None


def _resonance_points(J: SpectralDensity, omega0: float, lower: float, upper: float) -> List[float]:
    points = [omega0]
    if isinstance(J, LorentzianSpectralDensity):
        split = np.sqrt(J.coupling_squared)
        points += [J.omega_c, omega0 - split, omega0 + split, J.omega_c - split, J.omega_c + split]
    return sorted({p for p in points if lower < p < upper})


def steady_excitation(J: SpectralDensity, omega0: float, beta: float,
                      cutoff: Optional[FrequencyCutoff] = None, epsabs: float = 1e-11,
                      epsrel: float = 1e-10) -> Tuple[float, float]:
    """
    n̄ = ∫ J n_B / ([ω0 + Δ(ω) − ω]² + π²J²) dω and the weight normalization.

    The normalization integral drops n_B and equals 1 when every pole of Ĝ
    decays; a larger miss is logged.
    """
    cutoff = cutoff or FrequencyCutoff()
    if not J.continuum:
        raise UnsupportedVariantError("Steady excitation needs a continuum density")

    def weight(w):
        density = J.evaluate(w)
        if density == 0.0:
            return 0.0
        detuning = omega0 + J.lamb_shift(w, cutoff) - w
        return density / (detuning ** 2 + (np.pi * density) ** 2)

    lower, upper = J.support(cutoff)
    if isinstance(J, LorentzianSpectralDensity) and cutoff.use_full_real_axis:
        split = np.sqrt(J.coupling_squared)
        reach = split + 50.0 * J.eta
        a, b = min(omega0, J.omega_c) - reach, max(omega0, J.omega_c) + reach
        peaks = sorted({p for c in (omega0, J.omega_c) for p in (c - split, c, c + split) if a < p < b})
        pieces = [integrate.quad(weight, -np.inf, a, epsabs=epsabs, epsrel=epsrel, limit=1000)[0],
                  integrate.quad(weight, a, b, points=peaks, epsabs=epsabs, epsrel=epsrel, limit=1000)[0],
                  integrate.quad(weight, b, np.inf, epsabs=epsabs, epsrel=epsrel, limit=1000)[0]]
        normalization = float(sum(pieces))
    else:
        normalization = integrate.quad(weight, lower, upper, points=_resonance_points(J, omega0, lower, upper) or None,
                                       epsabs=epsabs, epsrel=epsrel, limit=1000)[0]
    if abs(normalization - 1.0) > NORMALIZATION_TOLERANCE:
        logger.warning("Steady-state weight normalizes to %.6f, not 1; a pole of Ĝ may not decay", normalization)

    if beta is None or np.isinf(beta):
        return 0.0, float(normalization)

    thermal_lower = max(lower, cutoff.omega_min)
    occupied = lambda w: weight(w) * planck(w, beta, cutoff.omega_min)
    occupation = integrate.quad(occupied, thermal_lower, upper,
                                points=_resonance_points(J, omega0, thermal_lower, upper) or None,
                                epsabs=epsabs, epsrel=epsrel, limit=1000)[0]
    return float(occupation), float(normalization)


def ness_displacement(J: SpectralDensity, omega0: float, modes: Sequence[DisplacedMode], times,
                      cutoff: Optional[FrequencyCutoff] = None) -> Tuple[np.ndarray, np.ndarray]:
    """φ_j = α_j g_j Ĝ(−iω_j) and F̄(t) = −iΣφ_j e^{−iω_jt}."""
    times = np.asarray(times, dtype=float)
    if not modes:
        return np.zeros(0, dtype=complex), np.zeros(times.shape, dtype=complex)
    frequencies = np.array([m.omega for m in modes])
    laplace = np.atleast_1d(green_laplace(J, omega0, frequencies, cutoff))
    phis = np.array([m.alpha * m.coupling for m in modes], dtype=complex) * laplace
    return phis, -1j * _phasor_sum(phis, frequencies, times)


def ness_force(phis: Sequence[complex], frequencies: Sequence[float], omega_r: float, gamma: float,
               times) -> np.ndarray:
    """f̄(t) = Σ(ω̄_r − ω_j − iγ̄/2)φ_j e^{−iω_jt}."""
    phis = np.asarray(phis, dtype=complex)
    frequencies = np.asarray(frequencies, dtype=float)
    return _phasor_sum((omega_r - frequencies - 0.5j * gamma) * phis, frequencies, np.asarray(times, dtype=float))


def _phasor_sum(amplitudes: np.ndarray, frequencies: np.ndarray, times: np.ndarray) -> np.ndarray:
    if amplitudes.size == 0:
        return np.zeros(times.shape, dtype=complex)
    return np.exp(-1j * np.outer(times, frequencies)) @ amplitudes


@dataclass(frozen=True)
class NessFluxes:
    """Constant energy, work, heat and entropy-production rates of a single-mode NESS."""

    internal_energy: float
    heat_rate: float
    work_rate: float
    entropy_production_rate: float


def ness_fluxes_single_mode(phis: Sequence[complex], modes: Sequence[DisplacedMode], laplace_values: Sequence[complex],
                            steady: SteadyState, rtol: float = 1e-9) -> NessFluxes:
    """
    Constant fluxes for exactly one displaced mode.

    σ̇ is evaluated from φ_d and again from α_d, g_d and Ĝ(−iω_d); the two must agree.
    """
    if len(modes) != 1 or len(phis) != 1:
        raise UnsupportedVariantError(f"Constant NESS fluxes need exactly one displaced mode, got {len(modes)}")
    mode = modes[0]
    weight = abs(phis[0]) ** 2
    omega_d = mode.omega

    energy = steady.omega_r * (steady.occupation - weight) + 2.0 * omega_d * weight
    work_rate = steady.gamma * omega_d * weight
    if weight == 0.0:
        return NessFluxes(steady.omega_r * steady.occupation, 0.0, 0.0, 0.0)

    sigma = steady.beta_r * steady.gamma * omega_d * weight
    chain = (steady.beta_r * steady.gamma * omega_d
             * abs(mode.alpha) ** 2 * abs(mode.coupling) ** 2 * abs(laplace_values[0]) ** 2)
    if np.isfinite(sigma) and not np.isclose(sigma, chain, rtol=rtol, atol=1e-14):
        raise FanoError(f"Entropy production rates disagree: {sigma!r} vs {chain!r}")
    return NessFluxes(float(energy), float(-work_rate), float(work_rate), float(sigma))


def verify_ness_unitarity(steady: SteadyState, phis: Sequence[complex], frequencies: Sequence[float],
                          times) -> float:
    """
    Largest mismatch between the NESS moment derivatives and the long-time
    moment equations, over the sampled times.
    """
    phis = np.asarray(phis, dtype=complex)
    frequencies = np.asarray(frequencies, dtype=float)
    times = np.asarray(times, dtype=float)
    if phis.size == 0:
        return 0.0

    displacement = -1j * _phasor_sum(phis, frequencies, times)
    displacement_rate = -_phasor_sum(frequencies * phis, frequencies, times)
    force = ness_force(phis, frequencies, steady.omega_r, steady.gamma, times)

    mean = displacement
    pair = displacement ** 2
    occupation = steady.occupation + np.abs(displacement) ** 2
    d_mean, d_pair, d_occupation = moment_rates(
        mean, pair, occupation, steady.omega_r, steady.gamma, steady.gamma * steady.occupation, force, 0.0
    )
    residuals = (
        np.abs(d_mean - displacement_rate),
        np.abs(d_pair - 2.0 * displacement * displacement_rate),
        np.abs(d_occupation - 2.0 * np.real(np.conj(displacement) * displacement_rate)),
    )
    return float(max(np.max(r) for r in residuals))


@dataclass
class ResonanceReport:
    """σ̇ over a drive-frequency grid with the located peak and resonance root."""

    frequencies: np.ndarray
    entropy_production_rates: np.ndarray
    peak_frequency: float
    root_frequency: Optional[float]

    @property
    def grid_step(self) -> float:
        return float(np.min(np.diff(self.frequencies))) if self.frequencies.size > 1 else np.inf

    def rows(self) -> List[Dict[str, float]]:
        return [{"omega_d": float(w), "sigmadot": float(s)}
                for w, s in zip(self.frequencies, self.entropy_production_rates)]


def resonance_sweep(J: SpectralDensity, omega0: float, coupling: complex, alpha: complex,
                    drive_frequencies: Sequence[float], steady: SteadyState,
                    cutoff: Optional[FrequencyCutoff] = None) -> ResonanceReport:
    """
    Sweep the displaced-mode frequency and locate the σ̇ maximum and the root of
    ω0 + Δ(ω) − ω nearest to it.
    """
    cutoff = cutoff or FrequencyCutoff()
    frequencies = np.asarray(drive_frequencies, dtype=float)
    laplace = np.atleast_1d(green_laplace(J, omega0, frequencies, cutoff))
    rates = steady.beta_r * steady.gamma * frequencies * np.abs(alpha * coupling * laplace) ** 2
    peak = float(frequencies[int(np.argmax(rates))])

    mismatch = lambda w: omega0 + float(J.lamb_shift(w, cutoff)) - w
    values = np.array([mismatch(w) for w in frequencies])
    brackets = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)
    roots = []
    for k in brackets:
        if values[k] == 0.0:
            roots.append(float(frequencies[k]))
        elif values[k + 1] != 0.0:
            roots.append(float(brentq(mismatch, frequencies[k], frequencies[k + 1], xtol=1e-12)))
    root = min(roots, key=lambda r: abs(r - peak)) if roots else None
    if root is None:
        logger.warning("No resonance root of ω0 + Δ(ω) − ω inside the sweep range")
    return ResonanceReport(frequencies, rates, peak, root)


@dataclass
class NessState:
    """Asymptotic displaced Gibbs state: phasors, displacement, force, energy and fluxes."""

    modes: Tuple[DisplacedMode, ...]
    phis: np.ndarray
    times: np.ndarray
    displacement: np.ndarray
    force: np.ndarray
    internal_energy: np.ndarray
    steady: SteadyState
    fluxes: Optional[NessFluxes] = None
    unitarity_residual: float = 0.0
    resonance: Optional[ResonanceReport] = field(default=None)

    def report(self) -> Dict:
        report = {
            "phi": [[float(p.real), float(p.imag)] for p in self.phis],
            "nbar": self.steady.occupation,
            "omega_r_bar": self.steady.omega_r,
            "gamma_bar": self.steady.gamma,
            "beta_r_bar": self.steady.beta_r,
            "unitarity_residual": self.unitarity_residual,
        }
        if self.fluxes is not None:
            report.update({
                "Ubar": self.fluxes.internal_energy,
                "Qdot": self.fluxes.heat_rate,
                "Wdot": self.fluxes.work_rate,
                "sigmadot": self.fluxes.entropy_production_rate,
            })
        if self.resonance is not None:
            report["resonance_sweep"] = self.resonance.rows()
            report["resonance_peak"] = self.resonance.peak_frequency
            report["resonance_root"] = self.resonance.root_frequency
        return report

    def csv_columns(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.times,
            "re_Fbar": self.displacement.real,
            "im_Fbar": self.displacement.imag,
            "re_fbar": self.force.real,
            "im_fbar": self.force.imag,
            "Ubar": self.internal_energy,
        }


def ness_state(J: SpectralDensity, omega0: float, modes: Sequence[DisplacedMode], steady: SteadyState,
               times, cutoff: Optional[FrequencyCutoff] = None) -> NessState:
    """Bundle φ, F̄, f̄, the NESS energy series and, for one mode, the constant fluxes."""
    cutoff = cutoff or FrequencyCutoff()
    modes = tuple(modes)
    times = np.asarray(times, dtype=float)
    phis, displacement = ness_displacement(J, omega0, modes, times, cutoff)
    frequencies = np.array([m.omega for m in modes])
    force = ness_force(phis, frequencies, steady.omega_r, steady.gamma, times)
    energy = (steady.omega_r * (steady.occupation + np.abs(displacement) ** 2)
              - 2.0 * np.imag(force * np.conj(displacement)))

    fluxes = None
    if len(modes) == 1:
        laplace = np.atleast_1d(green_laplace(J, omega0, frequencies, cutoff))
        fluxes = ness_fluxes_single_mode(phis, modes, laplace, steady)

    return NessState(
        modes=modes,
        phis=phis,
        times=times,
        displacement=displacement,
        force=force,
        internal_energy=energy,
        steady=steady,
        fluxes=fluxes,
        unitarity_residual=verify_ness_unitarity(steady, phis, frequencies, times),
    )

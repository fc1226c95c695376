"""
Time-dependent coefficients of the exact time-local master equation,
plus the Born-Markov, second-order and semiclassical limits.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .green import GreenFunction, TimeGrid, solve_green
from .quadrature import iterate_oscillatory, planck, rotated_transforms
from .spectral import FrequencyCutoff, SpectralDensity

logger = logging.getLogger(__name__)

GAMMA_FLOOR = 1e-9


@dataclass(frozen=True)
class DisplacedMode:
    """Bath mode prepared in a coherent state of amplitude ``alpha``."""

    omega: float
    coupling: complex
    alpha: complex


@dataclass(frozen=True)
class SqueezedMode:
    """
    Bath mode with anomalous moment ⟨⟨cc⟩⟩ = ``pair``.

    ``occupation`` is ⟨⟨c†c⟩⟩; None means the thermal value at the bath temperature.
    """

    omega: float
    coupling: complex
    pair: complex
    occupation: Optional[float] = None


@dataclass(frozen=True)
class EnvInitState:
    """Initial environment: temperature plus finitely many special modes."""

    beta: float = np.inf
    displaced: Tuple[DisplacedMode, ...] = ()
    squeezed: Tuple[SqueezedMode, ...] = ()

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", np.inf)
        if not self.beta > 0:
            raise ValueError(f"Inverse temperature must be positive, got {self.beta}")
        object.__setattr__(self, "displaced", tuple(self.displaced))
        object.__setattr__(self, "squeezed", tuple(self.squeezed))
        for mode in self.squeezed:
            self.check_squeezed(mode)

    @property
    def is_thermal(self) -> bool:
        return not self.displaced and not self.squeezed

    def mode_occupation(self, mode: SqueezedMode, omega_min: float = 0.0) -> float:
        if mode.occupation is not None:
            return float(mode.occupation)
        return planck(mode.omega, self.beta, omega_min)

    def check_squeezed(self, mode: SqueezedMode, omega_min: float = 0.0):
        occupation = self.mode_occupation(mode, omega_min)
        if occupation < 0 or abs(mode.pair) ** 2 > occupation * (occupation + 1.0) + 1e-12:
            raise ValueError(
                f"Squeezed mode at ω = {mode.omega} is unphysical: "
                f"|pair|² = {abs(mode.pair) ** 2:.6g} exceeds n(n+1) = {occupation * (occupation + 1):.6g}"
            )


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Every coefficient of the master equation sampled on the Green-function grid."""

    grid: TimeGrid
    omega0: float
    log_derivative: np.ndarray
    noise: np.ndarray
    noise_rate: np.ndarray
    displacement: np.ndarray
    force: np.ndarray
    squeeze: np.ndarray
    squeeze_drive: np.ndarray
    gamma_floor: float = GAMMA_FLOOR
    green: Optional[GreenFunction] = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def omega_r(self) -> np.ndarray:
        return -self.log_derivative.imag

    @property
    def gamma(self) -> np.ndarray:
        return -2.0 * self.log_derivative.real

    @property
    def gamma_excitation(self) -> np.ndarray:
        """γN = γI + İ, finite even where N itself is not."""
        return self.gamma * self.noise + self.noise_rate

    @property
    def excitation_defined(self) -> np.ndarray:
        return np.abs(self.gamma) >= self.gamma_floor

    @property
    def excitation(self) -> np.ndarray:
        """N(t); NaN where |γ| is below the floor."""
        excitation, _ = bath_excitation(self.noise, self.gamma, self.grid.dt,
                                        noise_rate=self.noise_rate, gamma_floor=self.gamma_floor)
        return excitation

    def with_force(self, displacement: np.ndarray, force: np.ndarray) -> "CoefficientSeries":
        return replace(self, displacement=displacement, force=force)

    def csv_columns(self) -> Dict[str, np.ndarray]:
        excitation = self.excitation
        return {
            "t": self.times,
            "omega_r": self.omega_r,
            "gamma": self.gamma,
            "I": self.noise,
            "N": np.nan_to_num(excitation, nan=0.0),
            "N_defined": self.excitation_defined.astype(int),
            "re_F": self.displacement.real,
            "im_F": self.displacement.imag,
            "re_f": self.force.real,
            "im_f": self.force.imag,
            "re_delta": self.squeeze_drive.real,
            "im_delta": self.squeeze_drive.imag,
        }


def omega_gamma(green: GreenFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Renormalized frequency ω_r = −Im(Ġ/G) and decay rate γ = −2Re(Ġ/G)."""
    ratio = green.log_derivative()
    return -ratio.imag, -2.0 * ratio.real


def noise_integral(green: GreenFunction, J: SpectralDensity, beta: float,
                   cutoff: Optional[FrequencyCutoff] = None, panel_width: float = 0.05,
                   extra_modes: Sequence[Tuple[float, float]] = ()) -> Tuple[np.ndarray, np.ndarray]:
    """
    I(t) = ∫ J(ω) n(ω) |∫₀ᵗ G(t−τ) e^{−iωτ} dτ|² dω and its exact time derivative.

    ``extra_modes`` are (ω, weight) pairs added to the frequency sum, used for
    special modes whose occupation differs from the thermal one.
    """
    if beta is None or not beta > 0:
        raise ValueError(f"Inverse temperature must be positive, got {beta}")
    cutoff = cutoff or FrequencyCutoff()
    steps = green.grid.steps
    noise = np.zeros(steps)
    rate = np.zeros(steps)

    frequencies = np.zeros(0)
    weights = np.zeros(0)
    if np.isfinite(beta):
        nodes, node_weights = J.noise_nodes(cutoff, panel_width)
        occupied = node_weights * planck(nodes, beta, cutoff.omega_min)
        keep = occupied != 0.0
        frequencies, weights = nodes[keep], occupied[keep]
    if extra_modes:
        extra = np.asarray(extra_modes, dtype=float).reshape(-1, 2)
        frequencies = np.concatenate([frequencies, extra[:, 0]])
        weights = np.concatenate([weights, extra[:, 1]])
    if frequencies.size == 0:
        return noise, rate

    dt = green.grid.dt
    for n, transform in iterate_oscillatory(green.values, green.derivatives, dt, frequencies):
        noise[n] = np.dot(weights, np.abs(transform) ** 2)
        edge = green.values[n] * np.exp(1j * frequencies * (n * dt))
        rate[n] = 2.0 * np.dot(weights, (np.conj(transform) * edge).real)
    return noise, rate


def bath_excitation(noise: np.ndarray, gamma: np.ndarray, dt: float,
                    noise_rate: Optional[np.ndarray] = None,
                    gamma_floor: float = GAMMA_FLOOR) -> Tuple[np.ndarray, np.ndarray]:
    """
    N = I + İ/γ with undefined samples (|γ| below the floor) set to NaN.

    İ falls back to second-order finite differences when no exact rate is given.
    """
    if noise_rate is None:
        noise_rate = np.gradient(noise, dt, edge_order=2)
    defined = np.abs(gamma) >= gamma_floor
    excitation = np.full(noise.shape, np.nan)
    excitation[defined] = noise[defined] + noise_rate[defined] / gamma[defined]
    return excitation, defined


def phasor_response(green: GreenFunction, amplitudes: Sequence[complex],
                    frequencies: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    F(t) = Σ_j c_j ∫₀ᵗ G(t−τ) e^{−iω_jτ} dτ and its exact derivative.

    Also returns the per-mode transforms A_j(t) with shape (M, modes).
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    frequencies = np.asarray(frequencies, dtype=float)
    steps = green.grid.steps
    if amplitudes.size == 0:
        return np.zeros(steps, complex), np.zeros(steps, complex), np.zeros((steps, 0), complex)

    transforms = rotated_transforms(green.values, green.derivatives, green.grid.dt, frequencies)
    response = transforms @ amplitudes
    rate = green.values * np.sum(amplitudes) - 1j * transforms @ (amplitudes * frequencies)
    return response, rate, transforms


def displacement_integral(green: GreenFunction, modes: Sequence[DisplacedMode]) -> Tuple[np.ndarray, np.ndarray]:
    """F(t) = −iΣ g_j α_j ∫₀ᵗ G(t−τ) e^{−iω_jτ} dτ and Ḟ(t)."""
    steps = green.grid.steps
    active = [m for m in modes if m.coupling != 0 and m.alpha != 0]
    if not active:
        return np.zeros(steps, complex), np.zeros(steps, complex)
    amplitudes = [-1j * m.coupling * m.alpha for m in active]
    response, rate, _ = phasor_response(green, amplitudes, [m.omega for m in active])
    return response, rate


def displacement_series(green: GreenFunction, modes: Sequence[DisplacedMode],
                        log_derivative: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Coherent displacement F(t) induced by displaced bath modes and the force f = Ḟ − (Ġ/G)F."""
    response, rate = displacement_integral(green, modes)
    if not np.any(response) and not np.any(rate):
        return response, rate
    if log_derivative is None:
        log_derivative = green.log_derivative()
    return response, rate - log_derivative * response


def squeeze_integral(green: GreenFunction, modes: Sequence[SqueezedMode]) -> Tuple[np.ndarray, np.ndarray]:
    """J_sq(t) = Σ g_j² ⟨⟨c_jc_j⟩⟩ A_j(t)² and J̇_sq(t)."""
    steps = green.grid.steps
    active = [m for m in modes if m.coupling != 0 and m.pair != 0]
    if not active:
        return np.zeros(steps, complex), np.zeros(steps, complex)

    frequencies = np.array([m.omega for m in active])
    weights = np.array([m.coupling ** 2 * m.pair for m in active], dtype=complex)
    transforms = rotated_transforms(green.values, green.derivatives, green.grid.dt, frequencies)
    transform_rates = green.values[:, None] - 1j * frequencies[None, :] * transforms
    return (transforms ** 2) @ weights, (2.0 * transforms * transform_rates) @ weights


def squeeze_series(green: GreenFunction, modes: Sequence[SqueezedMode],
                   log_derivative: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """J_sq and δ = J̇_sq − 2(Ġ/G)J_sq."""
    squeeze, squeeze_rate = squeeze_integral(green, modes)
    if not np.any(squeeze) and not np.any(squeeze_rate):
        return squeeze, squeeze_rate
    if log_derivative is None:
        log_derivative = green.log_derivative()
    return squeeze, squeeze_rate - 2.0 * log_derivative * squeeze


def excess_noise_modes(env: EnvInitState, cutoff: FrequencyCutoff) -> List[Tuple[float, float]]:
    """(ω, |g|²Δn) for squeezed modes whose occupation departs from the thermal one."""
    extra = []
    for mode in env.squeezed:
        env.check_squeezed(mode, cutoff.omega_min)
        excess = env.mode_occupation(mode, cutoff.omega_min) - planck(mode.omega, env.beta, cutoff.omega_min)
        if excess != 0.0 and mode.coupling != 0:
            extra.append((mode.omega, abs(mode.coupling) ** 2 * excess))
    return extra


def build_coefficients(green: GreenFunction, J: SpectralDensity, env: EnvInitState,
                       cutoff: Optional[FrequencyCutoff] = None, panel_width: float = 0.05,
                       gamma_floor: float = GAMMA_FLOOR) -> CoefficientSeries:
    """Assemble the full coefficient series for one scenario."""
    cutoff = cutoff or FrequencyCutoff()
    log_derivative = green.log_derivative()

    noise, noise_rate = noise_integral(green, J, env.beta, cutoff, panel_width, excess_noise_modes(env, cutoff))
    displacement, force = displacement_series(green, env.displaced, log_derivative)
    squeeze, squeeze_drive = squeeze_series(green, env.squeezed, log_derivative)

    return CoefficientSeries(
        grid=green.grid,
        omega0=green.omega0,
        log_derivative=log_derivative,
        noise=noise,
        noise_rate=noise_rate,
        displacement=displacement,
        force=force,
        squeeze=squeeze,
        squeeze_drive=squeeze_drive,
        gamma_floor=gamma_floor,
        green=green,
    )


def markov_limit(J: SpectralDensity, omega0: float, lam: float = 1.0,
                 cutoff: Optional[FrequencyCutoff] = None) -> Tuple[float, float]:
    """Born-Markov constants (γ^M, ω_r^M) = (2πλ²J(ω0), ω0 + λ²Δ(ω0))."""
    cutoff = cutoff or FrequencyCutoff()
    gamma = 2.0 * np.pi * lam ** 2 * float(J.evaluate(omega0))
    omega = omega0 + lam ** 2 * float(J.lamb_shift(omega0, cutoff))
    return gamma, omega


def second_order_lorentzian(gamma0: float, eta: float, detuning: float, omega0: float,
                            t) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form second-order ω_r(t), γ(t) for a Lorentzian; detuning is ω0 − ω_c."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    t = np.asarray(t, dtype=float)
    a = 1j * detuning - eta
    inner = 0.5 * gamma0 * eta * np.expm1(a * t) / a
    return omega0 + inner.imag, 2.0 * inner.real


@dataclass(frozen=True)
class SemiclassicalMode:
    """Strongly displaced mode of the work-reservoir limit, α = (ε/λ)e^{iθ}."""

    omega: float
    coupling: float
    phase: float = 0.0


def semiclassical_limit(omega0: float, modes: Sequence[SemiclassicalMode], epsilon: float,
                        t) -> Tuple[np.ndarray, np.ndarray]:
    """
    Limit λ → 0 at fixed ε: F_cl and the residual force f_cl.

    F_cl(t) = −iεΣ g e^{iθ} e^{−iω0t} ∫₀ᵗ e^{i(ω0−ω_k)τ} dτ, which stays finite on resonance.
    """
    t = np.asarray(t, dtype=float)
    displacement = np.zeros(t.shape, dtype=complex)
    force = np.zeros(t.shape, dtype=complex)
    for mode in modes:
        amplitude = -1j * epsilon * mode.coupling * np.exp(1j * mode.phase)
        z = 1j * (omega0 - mode.omega) * t
        with np.errstate(invalid="ignore", divide="ignore"):
            kernel = np.where(np.abs(z) < 1e-12, 1.0 + 0.5 * z, np.expm1(z) / np.where(z == 0, 1.0, z))
        displacement += amplitude * np.exp(-1j * omega0 * t) * t * kernel
        force += amplitude * np.exp(-1j * mode.omega * t)
    return displacement, force


@dataclass
class ScalingReport:
    """Per-λ headline numbers of the semiclassical approach and their fitted exponents."""

    lambdas: List[float]
    max_gamma: List[float]
    max_gamma_excitation: List[float]
    heat: List[float]
    force_deviation: List[float]
    exponents: Dict[str, float]


def semiclassical_scaling(J: SpectralDensity, omega0: float, modes: Sequence[SemiclassicalMode],
                          epsilon: float, lambdas: Sequence[float], grid: TimeGrid, beta: float = np.inf,
                          cutoff: Optional[FrequencyCutoff] = None) -> ScalingReport:
    """
    Run the exact pipeline at several couplings λ with displacements ε/λ.

    The system starts in vacuum. Heat is the cumulative dissipative heat.
    """
    from .dynamics import GaussianModeState, propagate_closed_form
    from .thermo import dissipative_heat_rate
    from .quadrature import cumulative

    cutoff = cutoff or FrequencyCutoff()
    report = ScalingReport(list(lambdas), [], [], [], [], {})
    for lam in lambdas:
        bath = J.scaled(lam)
        green = solve_green(bath, omega0, grid, cutoff)
        env = EnvInitState(
            beta=beta,
            displaced=tuple(
                DisplacedMode(m.omega, lam * m.coupling, epsilon / lam * np.exp(1j * m.phase)) for m in modes
            ),
        )
        coeffs = build_coefficients(green, bath, env, cutoff)
        states = propagate_closed_form(GaussianModeState.vacuum(), green, coeffs)
        heat = cumulative(dissipative_heat_rate(coeffs, states), grid.dt)
        _, force_cl = semiclassical_limit(omega0, modes, epsilon, grid.times)

        report.max_gamma.append(float(np.max(np.abs(coeffs.gamma))))
        report.max_gamma_excitation.append(float(np.max(np.abs(coeffs.gamma_excitation))))
        report.heat.append(float(abs(heat[-1])))
        report.force_deviation.append(float(np.max(np.abs(coeffs.force - force_cl))))

    log_lam = np.log(report.lambdas)
    for name, values in (("gamma", report.max_gamma), ("gamma_excitation", report.max_gamma_excitation),
                         ("heat", report.heat)):
        positive = np.asarray(values) > 0
        if np.count_nonzero(positive) >= 2:
            report.exponents[name] = float(np.polyfit(log_lam[positive], np.log(np.asarray(values)[positive]), 1)[0])
    return report

"""
Gaussian-state propagation of the central mode
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.special import xlogy

from .coefficients import (
    CoefficientSeries,
    EnvInitState,
    displacement_integral,
    excess_noise_modes,
    noise_integral,
    squeeze_integral,
)
from .errors import PositivityError, StepInstabilityError
from .green import GreenFunction
from .spectral import FrequencyCutoff, SpectralDensity

logger = logging.getLogger(__name__)

POSITIVITY_TOLERANCE = 1e-9
MAX_REFINEMENTS = 8


@dataclass(frozen=True)
class GaussianModeState:
    """Moments (⟨a⟩, ⟨aa⟩, ⟨a†a⟩) of a single-mode Gaussian state."""

    mean: complex = 0j
    pair: complex = 0j
    occupation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "pair", complex(self.pair))
        object.__setattr__(self, "occupation", float(self.occupation))

    @classmethod
    def vacuum(cls) -> "GaussianModeState":
        return cls()

    @classmethod
    def coherent(cls, alpha: complex) -> "GaussianModeState":
        alpha = complex(alpha)
        return cls(alpha, alpha ** 2, abs(alpha) ** 2)

    @classmethod
    def thermal(cls, occupation: float) -> "GaussianModeState":
        if occupation < 0:
            raise ValueError(f"Thermal occupation must be nonnegative, got {occupation}")
        return cls(0j, 0j, occupation)

    @property
    def central_occupation(self) -> float:
        return self.occupation - abs(self.mean) ** 2

    @property
    def central_pair(self) -> complex:
        return self.pair - self.mean ** 2

    @property
    def symplectic_eigenvalue(self) -> float:
        return float(symplectic_eigenvalue(self.mean, self.pair, self.occupation))

    def check_positivity(self, tolerance: float = POSITIVITY_TOLERANCE, time: Optional[float] = None):
        nu = self.symplectic_eigenvalue
        if not nu >= 0.5 - tolerance:
            raise PositivityError(time, nu)


def random_gaussian_states(count: int, seed: int = 0, max_occupation: float = 2.0) -> List[GaussianModeState]:
    """
    Reproducible physical Gaussian states for ensemble checks.

    Central occupations are uniform on [0, max_occupation]; the anomalous
    moment stays below 95% of its bound sqrt(n(n+1)) so ν > 1/2.
    """
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        mean = complex(rng.normal(), rng.normal())
        occupation = rng.uniform(0.0, max_occupation)
        radius = 0.95 * rng.uniform() * np.sqrt(occupation * (occupation + 1.0))
        pair = radius * np.exp(2j * np.pi * rng.uniform())
        states.append(GaussianModeState(mean, pair + mean ** 2, occupation + abs(mean) ** 2))
    return states


def symplectic_eigenvalue(mean, pair, occupation):
    """ν = sqrt((⟨⟨a†a⟩⟩ + 1/2)² − |⟨⟨aa⟩⟩|²), elementwise; NaN when the radicand is negative."""
    central_n = np.asarray(occupation, dtype=float) - np.abs(mean) ** 2
    central_p = np.abs(np.asarray(pair) - np.asarray(mean) ** 2)
    radicand = (central_n + 0.5) ** 2 - central_p ** 2
    with np.errstate(invalid="ignore"):
        return np.where(radicand >= 0, np.sqrt(np.maximum(radicand, 0.0)), np.nan)


def entropy_from_symplectic(nu):
    """S(ν) in nats; ν within rounding of 1/2 counts as a pure state."""
    nu = np.maximum(np.asarray(nu, dtype=float), 0.5)
    return xlogy(nu + 0.5, nu + 0.5) - xlogy(nu - 0.5, nu - 0.5)


@dataclass(frozen=True, eq=False)
class StateSeries:
    """Moment time series sampled on a uniform grid."""

    times: np.ndarray
    mean: np.ndarray
    pair: np.ndarray
    occupation: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def at(self, index: int) -> GaussianModeState:
        return GaussianModeState(self.mean[index], self.pair[index], self.occupation[index])

    @property
    def final(self) -> GaussianModeState:
        return self.at(-1)

    @property
    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalue(self.mean, self.pair, self.occupation)

    def entropy(self) -> np.ndarray:
        return entropy_from_symplectic(self.symplectic_eigenvalues)

    def positivity_violation(self, tolerance: float = POSITIVITY_TOLERANCE) -> Optional[Tuple[float, float]]:
        """First (time, ν) with ν < 1/2 − tolerance, or None."""
        nu = self.symplectic_eigenvalues
        bad = np.flatnonzero(~(nu >= 0.5 - tolerance))
        if bad.size == 0:
            return None
        return float(self.times[bad[0]]), float(nu[bad[0]])

    def warn_on_positivity(self, tolerance: float = POSITIVITY_TOLERANCE, label: str = "state"):
        violation = self.positivity_violation(tolerance)
        if violation is not None:
            logger.warning(
                "%s positivity violated at t = %.6g (ν = %.12g); upstream numerical error likely",
                label, violation[0], violation[1],
            )

    def max_deviation(self, other: "StateSeries", count: Optional[int] = None) -> Dict[str, float]:
        stop = count if count is not None else len(self)
        return {
            "mean": float(np.max(np.abs(self.mean[:stop] - other.mean[:stop]))),
            "pair": float(np.max(np.abs(self.pair[:stop] - other.pair[:stop]))),
            "occupation": float(np.max(np.abs(self.occupation[:stop] - other.occupation[:stop]))),
        }

    def csv_columns(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.times,
            "re_a": self.mean.real,
            "im_a": self.mean.imag,
            "re_aa": self.pair.real,
            "im_aa": self.pair.imag,
            "n": self.occupation,
            "S": self.entropy(),
        }


def _closed_form(state0: GaussianModeState, green: GreenFunction, displacement: np.ndarray,
                 squeeze: np.ndarray, noise: np.ndarray, label: str) -> StateSeries:
    G = green.values
    F = displacement
    mean0 = state0.mean

    mean = G * mean0 + F
    pair = G ** 2 * state0.pair + 2.0 * G * F * mean0 + F ** 2 - squeeze
    occupation = (np.abs(G) ** 2 * state0.occupation
                  + 2.0 * (G * np.conj(F) * mean0).real
                  + np.abs(F) ** 2 + noise)

    series = StateSeries(green.times, mean, pair, occupation)
    series.warn_on_positivity(label=label)
    return series


def propagate_closed_form(state0: GaussianModeState, green: GreenFunction,
                          coeffs: CoefficientSeries) -> StateSeries:
    """Exact moments from G and the coefficient integrals."""
    if coeffs.grid != green.grid:
        raise ValueError("Coefficients and Green function must share one time grid")
    return _closed_form(state0, green, coeffs.displacement, coeffs.squeeze, coeffs.noise, "closed-form")


def propagate_exact(state0: GaussianModeState, green: GreenFunction, J: SpectralDensity,
                    env: EnvInitState, cutoff: Optional[FrequencyCutoff] = None,
                    panel_width: float = 0.05) -> StateSeries:
    """
    Closed-form moments straight from G, F, J_sq and I.

    Never forms Ġ/G, so it stays valid across zeros of the Green function
    where the master-equation coefficients diverge.
    """
    cutoff = cutoff or FrequencyCutoff()
    noise, _ = noise_integral(green, J, env.beta, cutoff, panel_width, excess_noise_modes(env, cutoff))
    displacement, _ = displacement_integral(green, env.displaced)
    squeeze, _ = squeeze_integral(green, env.squeezed)
    return _closed_form(state0, green, displacement, squeeze, noise, "exact")


def moment_rates(mean, pair, occupation, omega_r, gamma, gamma_excitation, force, squeeze_drive=0.0):
    """Right-hand side of the master-equation moment equations."""
    damping = -1j * omega_r - 0.5 * gamma
    d_mean = damping * mean + force
    d_pair = 2.0 * damping * pair + 2.0 * force * mean - squeeze_drive
    d_occupation = -gamma * occupation + gamma_excitation + 2.0 * np.real(force * np.conj(mean))
    return d_mean, d_pair, d_occupation


def rk4_step(rate: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rate(t, y)
    k2 = rate(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rate(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rate(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_rk4(rate: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, times: np.ndarray,
                  substeps: int = 1, max_refinements: int = MAX_REFINEMENTS,
                  blowup: float = 1e12) -> np.ndarray:
    """
    Classical RK4 reporting the solution at ``times``.

    Each output interval is split into ``substeps`` steps. When the solution
    leaves the finite range the substep count doubles and the run restarts.
    """
    y0 = np.asarray(y0, dtype=complex)
    scale = blowup * max(1.0, float(np.max(np.abs(y0))) if y0.size else 1.0)
    for refinement in range(max_refinements + 1):
        out = np.empty((len(times), y0.size), dtype=complex)
        out[0] = y0
        y = y0.copy()
        stable = True
        for n in range(1, len(times)):
            h = (times[n] - times[n - 1]) / substeps
            t = times[n - 1]
            for k in range(substeps):
                y = rk4_step(rate, t + k * h, y, h)
            if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > scale:
                stable = False
                break
            out[n] = y
        if stable:
            return out
        logger.warning("RK4 unstable with %d substeps at t = %.6g; halving the step", substeps, times[n])
        substeps *= 2
    raise StepInstabilityError(f"RK4 integration diverged after {max_refinements} step halvings")


def coefficient_interpolant(coeffs: CoefficientSeries) -> Callable[[float], Tuple]:
    """Cubic-spline evaluator of (ω_r, γ, γN, f, δ) at arbitrary times."""
    table = np.column_stack([
        coeffs.omega_r,
        coeffs.gamma,
        coeffs.gamma_excitation,
        coeffs.force.real,
        coeffs.force.imag,
        coeffs.squeeze_drive.real,
        coeffs.squeeze_drive.imag,
    ])
    spline = CubicSpline(coeffs.times, table, axis=0)

    def evaluate(t: float):
        row = spline(t)
        return row[0], row[1], row[2], row[3] + 1j * row[4], row[5] + 1j * row[6]

    return evaluate


def propagate_ode(state0: GaussianModeState, coeffs: CoefficientSeries, substeps: int = 1,
                  max_refinements: int = MAX_REFINEMENTS) -> StateSeries:
    """Integrate the moment equations with RK4 over the coefficient grid."""
    interpolant = coefficient_interpolant(coeffs)

    def rate(t, y):
        omega_r, gamma, gamma_excitation, force, squeeze_drive = interpolant(t)
        d_mean, d_pair, d_occupation = moment_rates(
            y[0], y[1], y[2].real, omega_r, gamma, gamma_excitation, force, squeeze_drive
        )
        return np.array([d_mean, d_pair, d_occupation], dtype=complex)

    y0 = np.array([state0.mean, state0.pair, state0.occupation], dtype=complex)
    solution = integrate_rk4(rate, y0, coeffs.times, substeps, max_refinements)
    series = StateSeries(coeffs.times, solution[:, 0], solution[:, 1], solution[:, 2].real)
    series.warn_on_positivity(label="ODE")
    return series


def von_neumann_entropy(state: GaussianModeState, tolerance: float = POSITIVITY_TOLERANCE) -> float:
    """Entropy in nats of a single-mode Gaussian state."""
    state.check_positivity(tolerance)
    return float(entropy_from_symplectic(state.symplectic_eigenvalue))


def _ladder(dimension: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dimension)), k=1).astype(complex)


def fock_density_matrix(state: GaussianModeState, cutoff: int = 64) -> np.ndarray:
    """
    Truncated Fock-basis density matrix D(α) S(ξ) ρ_th S(ξ)† D(α)†.

    Operators are built in twice the requested dimension and cut back, so
    truncation only touches the highest levels.
    """
    if cutoff < 2:
        raise ValueError(f"Fock cutoff must be at least 2, got {cutoff}")
    state.check_positivity()
    nu = max(state.symplectic_eigenvalue, 0.5)
    central_pair = state.central_pair
    thermal_n = nu - 0.5

    dimension = 2 * cutoff
    a = _ladder(dimension)
    levels = np.arange(dimension)
    if thermal_n > 0:
        weights = thermal_n ** levels / (1.0 + thermal_n) ** (levels + 1)
    else:
        weights = (levels == 0).astype(float)
    rho = np.diag(weights).astype(complex)

    if abs(central_pair) > 0:
        r = 0.5 * np.arcsinh(abs(central_pair) / nu)
        xi = r * np.exp(1j * np.angle(-central_pair))
        squeeze = expm(0.5 * (np.conj(xi) * a @ a - xi * a.conj().T @ a.conj().T))
        rho = squeeze @ rho @ squeeze.conj().T
    if state.mean != 0:
        displacement = expm(state.mean * a.conj().T - np.conj(state.mean) * a)
        rho = displacement @ rho @ displacement.conj().T

    rho = rho[:cutoff, :cutoff]
    return rho / np.trace(rho).real


def fock_entropy(rho: np.ndarray) -> float:
    eigenvalues = np.clip(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)), 0.0, None)
    return float(-np.sum(xlogy(eigenvalues, eigenvalues)))

"""
External linear driving of the central mode and its renormalized force
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .coefficients import CoefficientSeries, EnvInitState, build_coefficients, phasor_response
from .dynamics import GaussianModeState, StateSeries, propagate_closed_form
from .green import GreenFunction
from .quadrature import trapezoid_convolution
from .spectral import FrequencyCutoff

logger = logging.getLogger(__name__)


class DrivingProtocol(ABC):
    """Complex drive l(t) adding il(t)a† − il*(t)a to the Hamiltonian, so d⟨a⟩/dt gains l(t)."""

    kind: str = "abstract"

    @abstractmethod
    def sample(self, times) -> np.ndarray:
        """l(t) on the given times."""

    def phasors(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """(amplitudes, frequencies) when l is a finite sum of e^{−iωt} terms."""
        return None


@dataclass(frozen=True)
class ConstantDrive(DrivingProtocol):
    amplitude: complex
    kind = "constant"

    def sample(self, times) -> np.ndarray:
        return np.full(np.shape(times), complex(self.amplitude))

    def phasors(self):
        return np.array([complex(self.amplitude)]), np.array([0.0])


@dataclass(frozen=True)
class MonochromaticDrive(DrivingProtocol):
    """l(t) = l0 e^{−iω_L t}."""

    amplitude: complex
    frequency: float
    kind = "monochromatic"

    def sample(self, times) -> np.ndarray:
        return complex(self.amplitude) * np.exp(-1j * self.frequency * np.asarray(times, dtype=float))

    def phasors(self):
        return np.array([complex(self.amplitude)]), np.array([float(self.frequency)])


@dataclass(frozen=True)
class GaussianPulse(DrivingProtocol):
    """l(t) = A exp(−(t − t_c)²/2w²) e^{−iω_L t}."""

    amplitude: complex
    center: float
    width: float
    frequency: float = 0.0
    kind = "gaussian_pulse"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"Pulse width must be positive, got {self.width}")

    def sample(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        envelope = np.exp(-0.5 * ((t - self.center) / self.width) ** 2)
        return complex(self.amplitude) * envelope * np.exp(-1j * self.frequency * t)


@dataclass(frozen=True, eq=False)
class SampledDrive(DrivingProtocol):
    """Drive given on sample times, linearly interpolated and zero outside the samples."""

    times: np.ndarray
    values: np.ndarray
    kind = "sampled"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("Sampled drive needs matching 1-D times and values with at least 2 samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Sampled drive times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("Sampled drive values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "SampledDrive":
        """Three columns: t, Re l, Im l."""
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 3:
            raise ValueError(f"Expected columns (t, re_l, im_l) in {path}, found {data.shape[1]}")
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2])

    def sample(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        real = np.interp(t, self.times, self.values.real, left=0.0, right=0.0)
        imag = np.interp(t, self.times, self.values.imag, left=0.0, right=0.0)
        return real + 1j * imag


def driving_response(green: GreenFunction, protocol: DrivingProtocol) -> Tuple[np.ndarray, np.ndarray]:
    """
    F(t) = ∫₀ᵗ G(t−τ) l(τ) dτ and its derivative G(0)l(t) + ∫₀ᵗ Ġ(t−τ) l(τ) dτ.

    Phasor protocols go through the oscillatory accumulator; others use the
    trapezoid convolution.
    """
    phasors = protocol.phasors()
    if phasors is not None:
        response, rate, _ = phasor_response(green, *phasors)
        return response, rate

    drive = protocol.sample(green.times)
    dt = green.grid.dt
    response = trapezoid_convolution(green.values, drive, dt)
    rate = green.values[0] * drive + trapezoid_convolution(green.derivatives, drive, dt)
    return response, rate


def renormalized_force(green: GreenFunction, protocol: DrivingProtocol) -> np.ndarray:
    """
    f_r(t) = l(t) + ∫₀ᵗ [Ġ(t−τ)/G(t−τ) − Ġ(t)/G(t)] G(t−τ) l(τ) dτ

    by the trapezoid convolution.
    """
    log_derivative = green.log_derivative()
    drive = protocol.sample(green.times)
    dt = green.grid.dt
    return (drive + trapezoid_convolution(green.derivatives, drive, dt)
            - log_derivative * trapezoid_convolution(green.values, drive, dt))


def renormalized_force_rates(green: GreenFunction, protocol: DrivingProtocol) -> np.ndarray:
    """The same force written through ω_r and γ at the lagged time."""
    log_derivative = green.log_derivative()
    omega_r, gamma = -log_derivative.imag, -2.0 * log_derivative.real
    drive = protocol.sample(green.times)
    dt = green.grid.dt
    lagged = (-1j * omega_r - 0.5 * gamma) * green.values
    return (drive + trapezoid_convolution(lagged, drive, dt)
            - (-1j * omega_r - 0.5 * gamma) * trapezoid_convolution(green.values, drive, dt))


def drive_coefficients(coeffs: CoefficientSeries, green: GreenFunction,
                       protocol: DrivingProtocol) -> CoefficientSeries:
    """Add the drive's displacement and renormalized force to a coefficient series."""
    response, rate = driving_response(green, protocol)
    force = rate - coeffs.log_derivative * response
    return coeffs.with_force(coeffs.displacement + response, coeffs.force + force)


def driven_moments(state0: GaussianModeState, green: GreenFunction, protocol: DrivingProtocol,
                   env: Optional[EnvInitState] = None, cutoff: Optional[FrequencyCutoff] = None,
                   coeffs: Optional[CoefficientSeries] = None) -> Tuple[StateSeries, CoefficientSeries]:
    """Closed-form driven moments; also returns the driven coefficient series."""
    if coeffs is None:
        env = env or EnvInitState()
        coeffs = build_coefficients(green, green.spectral_density, env, cutoff)
    driven = drive_coefficients(coeffs, green, protocol)
    return propagate_closed_form(state0, green, driven), driven

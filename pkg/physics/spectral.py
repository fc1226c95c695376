"""
Spectral density models: memory kernel, Lamb shift, kernel Laplace transform
and bath discretization.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import UnsupportedVariantError
from .quadrature import fourier_quad, gauss_legendre_panels, principal_value

logger = logging.getLogger(__name__)

_KERNEL_CHUNK = 512


@dataclass(frozen=True)
class FrequencyCutoff:
    """Frequency range used for quadrature and discretization."""

    omega_max: float = 20.0
    use_full_real_axis: bool = True
    omega_min: float = 1e-2

    def __post_init__(self):
        if self.omega_max <= 0:
            raise ValueError(f"omega_max must be positive, got {self.omega_max}")
        if self.omega_min < 0 or self.omega_min >= self.omega_max:
            raise ValueError(f"omega_min must lie in [0, omega_max), got {self.omega_min}")

    @property
    def support(self) -> Tuple[float, float]:
        lower = -self.omega_max if self.use_full_real_axis else 0.0
        return lower, self.omega_max


@dataclass(frozen=True)
class DiracKernel:
    """Symbolic kernel weight·δ(t) of a flat spectral density."""

    weight: float


class SpectralDensity(ABC):
    """Base class for coupling landscapes J(ω)."""

    kind: str = "abstract"
    continuum: bool = True

    @abstractmethod
    def evaluate(self, omega):
        """J(ω) at one or many frequencies."""

    @abstractmethod
    def scaled(self, lam: float) -> "SpectralDensity":
        """The density for couplings scaled by λ, i.e. λ²J."""

    @property
    def feature_width(self) -> float:
        """Smallest frequency scale the density varies on."""
        return np.inf

    def support(self, cutoff: FrequencyCutoff) -> Tuple[float, float]:
        return cutoff.support

    def memory_kernel(self, t, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        """K(t) = ∫ J(ω) e^{−iωt} dω by adaptive oscillatory quadrature."""
        lower, upper = self.support(cutoff)
        times = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(times < 0):
            raise ValueError("memory kernel is defined for t >= 0 only")

        scalar = lambda w: float(self.evaluate(w))
        values = np.array([fourier_quad(scalar, lower, upper, tk, epsabs, epsrel) for tk in times])
        return values if np.ndim(t) else complex(values[0])

    def lamb_shift(self, omega, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        """Δ(ω) = P∫ J(ω′)/(ω − ω′) dω′ over the density's support."""
        lower, upper = self.support(cutoff)
        scalar = lambda w: float(self.evaluate(w))
        omegas = np.atleast_1d(np.asarray(omega, dtype=float))
        values = np.array([-principal_value(scalar, lower, upper, w, epsabs, epsrel) for w in omegas])
        return values if np.ndim(omega) else float(values[0])

    def kernel_laplace(self, omega, cutoff: FrequencyCutoff):
        """K̂(−iω) = πJ(ω) + iΔ(ω)."""
        return np.pi * self.evaluate(omega) + 1j * self.lamb_shift(omega, cutoff)

    def total_weight(self, cutoff: FrequencyCutoff) -> float:
        """∫J dω, which equals K(0)."""
        return float(np.real(self.memory_kernel(0.0, cutoff)))

    def discretize(self, n_modes: int, cutoff: FrequencyCutoff) -> "DiscreteSpectralDensity":
        """
        Replace the continuum by ``n_modes`` modes on a uniform midpoint grid.

        Each mode gets g_j = sqrt(J(ω_j) Δω), so Σ g_j² approximates ∫J dω.
        """
        if n_modes < 2:
            raise ValueError(f"Need at least 2 modes, got {n_modes}")
        lower, upper = self.support(cutoff)
        spacing = (upper - lower) / n_modes
        frequencies = lower + (np.arange(n_modes) + 0.5) * spacing

        if spacing > self.feature_width / 8.0:
            logger.warning(
                "Discretization with %d modes has spacing %.3g, fewer than 8 modes across width %.3g",
                n_modes, spacing, self.feature_width,
            )

        couplings = np.sqrt(np.maximum(self.evaluate(frequencies), 0.0) * spacing)
        return DiscreteSpectralDensity(
            frequencies=frequencies,
            couplings=couplings.astype(complex),
            allow_negative=lower < 0,
        )

    def noise_nodes(self, cutoff: FrequencyCutoff, panel_width: float = 0.05,
                    order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
        """
        Quadrature nodes and weights J(ω)dω for thermal integrals.

        Only ω ≥ ω_min carries thermal occupation, so the nodes start there.
        """
        lower, upper = self.support(cutoff)
        lower = max(lower, cutoff.omega_min)
        width = min(panel_width, self.feature_width / 2.0)
        panels = max(1, int(np.ceil((upper - lower) / width)))
        nodes, weights = gauss_legendre_panels(lower, upper, panels, order)
        return nodes, weights * self.evaluate(nodes)


class FlatSpectralDensity(SpectralDensity):
    """J(ω) = γ0/2π on the whole real axis."""

    kind = "flat"

    def __init__(self, gamma0: float):
        if gamma0 < 0:
            raise ValueError(f"gamma0 must be non-negative, got {gamma0}")
        self.gamma0 = float(gamma0)

    def __repr__(self):
        return f"FlatSpectralDensity(gamma0={self.gamma0})"

    def evaluate(self, omega):
        return np.full(np.shape(omega), self.gamma0 / (2.0 * np.pi)) if np.ndim(omega) else self.gamma0 / (2.0 * np.pi)

    def scaled(self, lam: float) -> "FlatSpectralDensity":
        return FlatSpectralDensity(self.gamma0 * lam ** 2)

    def memory_kernel(self, t, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        return DiracKernel(weight=self.gamma0)

    def lamb_shift(self, omega, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        return np.zeros(np.shape(omega)) if np.ndim(omega) else 0.0

    def kernel_laplace(self, omega, cutoff: FrequencyCutoff):
        return np.full(np.shape(omega), self.gamma0 / 2.0, dtype=complex) if np.ndim(omega) else complex(self.gamma0 / 2.0)

    def total_weight(self, cutoff: FrequencyCutoff) -> float:
        lower, upper = cutoff.support
        return self.gamma0 * (upper - lower) / (2.0 * np.pi)


class LorentzianSpectralDensity(SpectralDensity):
    """J(ω) = (γ0/2π) η²/((ω − ω_c)² + η²)."""

    kind = "lorentzian"

    def __init__(self, gamma0: float, eta: float, omega_c: float):
        if gamma0 <= 0:
            raise ValueError(f"gamma0 must be positive, got {gamma0}")
        if eta <= 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.gamma0 = float(gamma0)
        self.eta = float(eta)
        self.omega_c = float(omega_c)

    def __repr__(self):
        return f"LorentzianSpectralDensity(gamma0={self.gamma0}, eta={self.eta}, omega_c={self.omega_c})"

    @property
    def feature_width(self) -> float:
        return self.eta

    @property
    def coupling_squared(self) -> float:
        """K(0) = γ0η/2 on the full axis."""
        return 0.5 * self.gamma0 * self.eta

    def evaluate(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega_c
        value = self.gamma0 / (2.0 * np.pi) * self.eta ** 2 / (x ** 2 + self.eta ** 2)
        return value if np.ndim(omega) else float(value)

    def scaled(self, lam: float) -> "LorentzianSpectralDensity":
        return LorentzianSpectralDensity(self.gamma0 * lam ** 2, self.eta, self.omega_c)

    def memory_kernel(self, t, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        if not cutoff.use_full_real_axis:
            return super().memory_kernel(t, cutoff, epsabs, epsrel)
        times = np.asarray(t, dtype=float)
        if np.any(times < 0):
            raise ValueError("memory kernel is defined for t >= 0 only")
        value = self.coupling_squared * np.exp(-(self.eta + 1j * self.omega_c) * times)
        return value if np.ndim(t) else complex(value)

    def lamb_shift(self, omega, cutoff: FrequencyCutoff, epsabs: float = 1e-10, epsrel: float = 1e-10):
        if not cutoff.use_full_real_axis:
            return super().lamb_shift(omega, cutoff, epsabs, epsrel)
        x = np.asarray(omega, dtype=float) - self.omega_c
        value = self.coupling_squared * x / (x ** 2 + self.eta ** 2)
        return value if np.ndim(omega) else float(value)

    def total_weight(self, cutoff: FrequencyCutoff) -> float:
        if cutoff.use_full_real_axis:
            return self.coupling_squared
        return super().total_weight(cutoff)

    def negative_axis_weight(self) -> float:
        """∫_{−∞}^0 J dω, the part the full-axis extension adds."""
        return self.gamma0 * self.eta / (2.0 * np.pi) * (np.pi / 2.0 - np.arctan(self.omega_c / self.eta))


@dataclass(frozen=True, eq=False)
class DiscreteSpectralDensity(SpectralDensity):
    """Finite bath Σ_j |g_j|² δ(ω − ω_j)."""

    frequencies: np.ndarray
    couplings: np.ndarray
    allow_negative: bool = False
    kind: str = field(default="discrete", init=False)
    continuum: bool = field(default=False, init=False)

    def __post_init__(self):
        frequencies = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        couplings = np.atleast_1d(np.asarray(self.couplings, dtype=complex))
        if frequencies.shape != couplings.shape or frequencies.size == 0:
            raise ValueError("frequencies and couplings must be non-empty and of equal length")
        if not self.allow_negative and np.any(frequencies <= 0):
            raise ValueError("discrete bath frequencies must be positive")
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "couplings", couplings)

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.couplings) ** 2

    @property
    def spacing(self) -> float:
        if self.frequencies.size < 2:
            return np.inf
        return float(np.min(np.diff(np.sort(self.frequencies))))

    @property
    def recurrence_time(self) -> float:
        return 2.0 * np.pi / self.spacing

    def evaluate(self, omega):
        raise UnsupportedVariantError("Discrete bath has no pointwise density")

    def scaled(self, lam: float) -> "DiscreteSpectralDensity":
        return DiscreteSpectralDensity(self.frequencies, self.couplings * lam, self.allow_negative)

    def memory_kernel(self, t, cutoff: FrequencyCutoff = None, epsabs: float = 1e-10, epsrel: float = 1e-10):
        times = np.atleast_1d(np.asarray(t, dtype=float))
        values = np.empty(times.shape, dtype=complex)
        for start in range(0, times.size, _KERNEL_CHUNK):
            chunk = times[start:start + _KERNEL_CHUNK]
            values[start:start + _KERNEL_CHUNK] = np.exp(-1j * np.outer(chunk, self.frequencies)) @ self.weights
        return values if np.ndim(t) else complex(values[0])

    def lamb_shift(self, omega, cutoff: FrequencyCutoff = None, epsabs: float = 1e-10, epsrel: float = 1e-10):
        raise UnsupportedVariantError("Lamb shift requires a continuum density")

    def kernel_laplace(self, omega, cutoff: FrequencyCutoff = None):
        raise UnsupportedVariantError("Kernel Laplace transform requires a continuum density")

    def total_weight(self, cutoff: FrequencyCutoff = None) -> float:
        return float(np.sum(self.weights))

    def discretize(self, n_modes: int, cutoff: FrequencyCutoff):
        raise UnsupportedVariantError("Bath is already discrete")

    def noise_nodes(self, cutoff: FrequencyCutoff, panel_width: float = 0.05, order: int = 8):
        return self.frequencies, self.weights


class TabulatedSpectralDensity(SpectralDensity):
    """Density sampled on a strictly increasing grid, zero outside it."""

    kind = "tabulated"

    def __init__(self, frequencies, values, order: int = 3):
        frequencies = np.asarray(frequencies, dtype=float)
        values = np.asarray(values, dtype=float)
        if frequencies.ndim != 1 or frequencies.shape != values.shape or frequencies.size < order + 1:
            raise ValueError("Tabulated density needs matching 1-D samples, more than the interpolation order")
        if np.any(np.diff(frequencies) <= 0):
            raise ValueError("Tabulated frequency grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("Tabulated density samples must be non-negative")
        if order not in (1, 3):
            raise ValueError(f"Interpolation order must be 1 or 3, got {order}")

        self.frequencies = frequencies
        self.values = values
        self.order = order
        self._spline = make_interp_spline(frequencies, values, k=order)

    def __repr__(self):
        return (f"TabulatedSpectralDensity([{self.frequencies[0]:g}, {self.frequencies[-1]:g}], "
                f"{self.frequencies.size} samples, order={self.order})")

    @classmethod
    def from_csv(cls, path: Union[str, Path], order: int = 3) -> "TabulatedSpectralDensity":
        """Load a two-column (frequency, density) CSV, header lines starting with '#' skipped."""
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"Expected two columns in {path}, found {data.shape[1]}")
        return cls(data[:, 0], data[:, 1], order)

    @property
    def feature_width(self) -> float:
        return float(np.min(np.diff(self.frequencies))) * 4.0

    def support(self, cutoff: FrequencyCutoff) -> Tuple[float, float]:
        lower, upper = cutoff.support
        lower = max(lower, self.frequencies[0])
        upper = min(upper, self.frequencies[-1])
        if upper <= lower:
            raise ValueError("Tabulated grid does not overlap the frequency cutoff")
        return lower, upper

    def evaluate(self, omega):
        w = np.asarray(omega, dtype=float)
        inside = (w >= self.frequencies[0]) & (w <= self.frequencies[-1])
        value = np.where(inside, np.maximum(self._spline(np.clip(w, self.frequencies[0], self.frequencies[-1])), 0.0), 0.0)
        return value if np.ndim(omega) else float(value)

    def scaled(self, lam: float) -> "TabulatedSpectralDensity":
        return TabulatedSpectralDensity(self.frequencies, self.values * lam ** 2, self.order)

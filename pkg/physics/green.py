"""
Green function of the damped central mode: Volterra solver, closed forms,
second-order expansion, Laplace transform and logarithmic derivative.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import minimize_scalar

from .errors import RedirectError, UnsupportedVariantError, ZeroCrossingError
from .quadrature import iterate_oscillatory
from .spectral import (
    DiracKernel,
    FlatSpectralDensity,
    FrequencyCutoff,
    LorentzianSpectralDensity,
    SpectralDensity,
)

logger = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-10
CONTRACTIVITY_TOLERANCE = 1e-8
DEGENERATE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n·Δt for n = 0..M−1."""

    dt: float
    steps: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"Time step must be positive, got {self.dt}")
        if self.steps < 2:
            raise ValueError(f"Grid needs at least 2 samples, got {self.steps}")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps)

    @property
    def duration(self) -> float:
        return self.dt * (self.steps - 1)

    @classmethod
    def spanning(cls, duration: float, dt: float) -> "TimeGrid":
        return cls(dt=dt, steps=int(round(duration / dt)) + 1)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(dt=self.dt / factor, steps=(self.steps - 1) * factor + 1)


@dataclass(frozen=True, eq=False)
class GreenFunction:
    """Sampled G(t) and Ġ(t) together with the model that produced them."""

    grid: TimeGrid
    values: np.ndarray
    derivatives: np.ndarray
    method: str
    omega0: float
    spectral_density: Optional[SpectralDensity] = None

    def __post_init__(self):
        if self.values.shape != (self.grid.steps,) or self.derivatives.shape != (self.grid.steps,):
            raise ValueError("Green function samples do not match the grid")
        if self.values[0] != 1.0:
            raise ValueError(f"G(0) must equal 1, got {self.values[0]}")

        excess = np.max(np.abs(self.values)) - 1.0
        if excess > CONTRACTIVITY_TOLERANCE and self.method != "second_order":
            logger.warning("|G(t)| exceeds 1 by %.3e (%s solver); grid may be too coarse", excess, self.method)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def log_derivative(self, threshold: float = ZERO_THRESHOLD, check_interpolant: bool = True) -> np.ndarray:
        """
        Ġ(t)/G(t) from the stored derivative.

        Raises ZeroCrossingError at the first sample (or interpolated time)
        where G vanishes.
        """
        magnitude = np.abs(self.values)
        small = np.flatnonzero(magnitude < threshold)
        if small.size:
            index = small[0]
            raise ZeroCrossingError(self.times[index], magnitude[index])

        if check_interpolant:
            crossings = locate_zero_crossings(self, threshold)
            if crossings:
                time, depth = crossings[0]
                raise ZeroCrossingError(time, depth)

        return self.derivatives / self.values

    def laplace(self, omega) -> np.ndarray:
        """One-sided transform ∫₀^T G(t) e^{iωt} dt of the samples, i.e. Ĝ(−iω) once G has decayed."""
        last = None
        for _, last in iterate_oscillatory(self.values, self.derivatives, self.grid.dt, omega):
            pass
        return last if np.ndim(omega) else complex(last[0])

    def tail_decay_rate(self, tail_fraction: float = 0.5) -> float:
        """Slope of log|G| fitted over the last part of the grid."""
        start = int(self.grid.steps * (1.0 - tail_fraction))
        slope, _ = np.polyfit(self.times[start:], np.log(np.abs(self.values[start:])), 1)
        return float(slope)

    def csv_columns(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.times,
            "re_G": self.values.real,
            "im_G": self.values.imag,
            "re_Gdot": self.derivatives.real,
            "im_Gdot": self.derivatives.imag,
        }


def _hermite(g0, d0, g1, d1, dt, s):
    s2, s3 = s * s, s * s * s
    return ((2 * s3 - 3 * s2 + 1) * g0 + (s3 - 2 * s2 + s) * dt * d0
            + (-2 * s3 + 3 * s2) * g1 + (s3 - s2) * dt * d1)


def locate_zero_crossings(green: GreenFunction, threshold: float = ZERO_THRESHOLD,
                          relative_floor: float = 1e-6) -> List[Tuple[float, float]]:
    """
    Times where G(t) vanishes between samples.

    Intervals whose endpoints are within one step's worth of |Ġ| of zero are
    refined by minimising |G| along the cubic Hermite interpolant. A minimum
    below ``threshold`` or below ``relative_floor·Δt·|Ġ|`` counts as a zero.
    """
    g, d, dt = green.values, green.derivatives, green.grid.dt
    magnitude = np.abs(g)
    reach = dt * np.maximum(np.abs(d[:-1]), np.abs(d[1:]))
    candidates = np.flatnonzero(np.minimum(magnitude[:-1], magnitude[1:]) <= reach)

    crossings = []
    for n in candidates:
        result = minimize_scalar(
            lambda s: abs(_hermite(g[n], d[n], g[n + 1], d[n + 1], dt, s)),
            bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12},
        )
        if result.fun < max(threshold, relative_floor * reach[n]):
            crossings.append((float(green.times[n] + result.x * dt), float(result.fun)))
    return crossings


def green_flat(gamma0: float, omega0: float, grid: TimeGrid) -> GreenFunction:
    """G(t) = e^{−iω0t − γ0t/2}, exact for a flat density."""
    if gamma0 < 0:
        raise ValueError(f"gamma0 must be non-negative, got {gamma0}")
    rate = -1j * omega0 - 0.5 * gamma0
    values = np.exp(rate * grid.times)
    values[0] = 1.0
    return GreenFunction(grid, values, rate * values, "closed_flat", omega0, FlatSpectralDensity(gamma0))


def lorentzian_roots(gamma0: float, eta: float, omega_c: float, omega0: float) -> Tuple[complex, complex]:
    """Roots of μ² + (η − iΔ)μ + γ0η/2 = 0 with Δ = ω0 − ω_c."""
    b = eta - 1j * (omega0 - omega_c)
    root = np.sqrt(b * b - 2.0 * gamma0 * eta)
    return complex(0.5 * (-b + root)), complex(0.5 * (-b - root))


def green_lorentzian_closed(gamma0: float, eta: float, omega_c: float, omega0: float,
                            grid: TimeGrid, degenerate_tolerance: float = DEGENERATE_TOLERANCE) -> GreenFunction:
    """Closed-form G(t) for the full-axis Lorentzian density."""
    t = grid.times
    b = eta - 1j * (omega0 - omega_c)
    discriminant = b * b - 2.0 * gamma0 * eta
    carrier = np.exp(-1j * omega0 * t)

    if abs(discriminant) < degenerate_tolerance:
        logger.warning("Degenerate Lorentzian roots (|disc| = %.3e); using the confluent form", abs(discriminant))
        mu = -0.5 * b
        growth = np.exp(mu * t)
        rotating = (1.0 - mu * t) * growth
        rotating_rate = -mu * mu * t * growth
    else:
        mu1, mu2 = lorentzian_roots(gamma0, eta, omega_c, omega0)
        e1, e2 = np.exp(mu1 * t), np.exp(mu2 * t)
        rotating = (mu2 * e1 - mu1 * e2) / (mu2 - mu1)
        rotating_rate = mu1 * mu2 * (e1 - e2) / (mu2 - mu1)

    values = carrier * rotating
    values[0] = 1.0
    derivatives = -1j * omega0 * values + carrier * rotating_rate
    return GreenFunction(grid, values, derivatives, "closed_lorentzian", omega0,
                         LorentzianSpectralDensity(gamma0, eta, omega_c))


def solve_volterra(J: SpectralDensity, omega0: float, grid: TimeGrid,
                   cutoff: Optional[FrequencyCutoff] = None, step_limit: float = 0.5) -> GreenFunction:
    """
    Solve Ġ + iω0G + ∫₀ᵗ K(t−τ)G(τ)dτ = 0, G(0) = 1.

    Works on G̃ = e^{iω0t}G with the product-trapezoidal rule on the memory
    integral, implicit in the newest sample. Ġ comes from the equation.
    """
    cutoff = cutoff or FrequencyCutoff()
    kernel = J.memory_kernel(grid.times, cutoff)
    if isinstance(kernel, DiracKernel):
        raise RedirectError("Flat spectral density has a Dirac kernel", "green_flat")

    t, dt = grid.times, grid.dt
    scale = max(abs(omega0), np.sqrt(abs(kernel[0])))
    if dt * scale > step_limit:
        logger.warning("Volterra step Δt = %.3g too large for scale %.3g", dt, scale)

    rotated = kernel * np.exp(1j * omega0 * t)
    k0 = rotated[0]
    g = np.zeros(grid.steps, dtype=complex)
    dg = np.zeros(grid.steps, dtype=complex)
    g[0] = 1.0
    denominator = 1.0 + 0.25 * dt * dt * k0

    for n in range(1, grid.steps):
        history = 0.5 * rotated[n] * g[0]
        if n > 1:
            history += np.dot(rotated[n - 1:0:-1], g[1:n])
        history *= dt
        g[n] = (g[n - 1] + 0.5 * dt * (dg[n - 1] - history)) / denominator
        dg[n] = -history - 0.5 * dt * k0 * g[n]

    carrier = np.exp(-1j * omega0 * t)
    values = carrier * g
    values[0] = 1.0
    derivatives = carrier * (dg - 1j * omega0 * g)
    return GreenFunction(grid, values, derivatives, "volterra", omega0, J)


def volterra_convergence(J: LorentzianSpectralDensity, omega0: float, grid: TimeGrid,
                         cutoff: Optional[FrequencyCutoff] = None, factor: int = 2) -> Tuple[float, float, float]:
    """
    Observed order of the Volterra solver against the closed-form Lorentzian.

    Solves on ``grid`` and on ``grid.refined(factor)`` and returns
    (log_factor(e_coarse / e_fine), e_coarse, e_fine), e being the max error.
    """
    cutoff = cutoff or FrequencyCutoff()
    if not (isinstance(J, LorentzianSpectralDensity) and cutoff.use_full_real_axis):
        raise UnsupportedVariantError("Convergence order needs the full-axis Lorentzian closed form")
    errors = []
    for current in (grid, grid.refined(factor)):
        numeric = solve_volterra(J, omega0, current, cutoff)
        exact = green_lorentzian_closed(J.gamma0, J.eta, J.omega_c, omega0, current)
        errors.append(float(np.max(np.abs(numeric.values - exact.values))))
    coarse, fine = errors
    return float(np.log(coarse / fine) / np.log(factor)), coarse, fine


def solve_green(J: SpectralDensity, omega0: float, grid: TimeGrid,
                cutoff: Optional[FrequencyCutoff] = None, method: str = "auto") -> GreenFunction:
    """Pick the exact closed form where one exists, otherwise the Volterra solver."""
    cutoff = cutoff or FrequencyCutoff()
    if isinstance(J, FlatSpectralDensity):
        return green_flat(J.gamma0, omega0, grid)

    closed_available = isinstance(J, LorentzianSpectralDensity) and cutoff.use_full_real_axis
    if method in ("auto", "closed") and closed_available:
        return green_lorentzian_closed(J.gamma0, J.eta, J.omega_c, omega0, grid)
    if method == "closed":
        raise UnsupportedVariantError(f"No closed form for {J.kind} density with this cutoff")
    if method not in ("auto", "volterra"):
        raise ValueError(f"Unknown Green solver method {method!r}")
    return solve_volterra(J, omega0, grid, cutoff)


def green_laplace(J: SpectralDensity, omega0: float, omega, cutoff: Optional[FrequencyCutoff] = None):
    """Ĝ(−iω) = 1/(i(ω0 + Δ(ω) − ω) + πJ(ω))."""
    cutoff = cutoff or FrequencyCutoff()
    return 1.0 / (1j * (omega0 - np.asarray(omega, dtype=float)) + J.kernel_laplace(omega, cutoff))


def green_second_order(J: SpectralDensity, omega0: float, lam: float, grid: TimeGrid,
                       cutoff: Optional[FrequencyCutoff] = None) -> Tuple[GreenFunction, np.ndarray]:
    """
    Second-order expansion in the coupling scale λ.

    Ġ/G ≈ −iω0 − λ²k(t) with k(t) = ∫₀ᵗ K(u)e^{iω0u}du, and
    G ≈ e^{−iω0t}(1 − λ²∫₀ᵗ k). Returns the GreenFunction and Ġ/G.
    """
    cutoff = cutoff or FrequencyCutoff()
    t = grid.times
    inner, inner_integral = _second_order_integrals(J, omega0, t, cutoff)

    carrier = np.exp(-1j * omega0 * t)
    values = carrier * (1.0 - lam ** 2 * inner_integral)
    values[0] = 1.0
    derivatives = -1j * omega0 * values - lam ** 2 * carrier * inner
    log_derivative = -1j * omega0 - lam ** 2 * inner
    green = GreenFunction(grid, values, derivatives, "second_order", omega0, J.scaled(lam))
    return green, log_derivative


def _second_order_integrals(J: SpectralDensity, omega0: float, t: np.ndarray,
                            cutoff: FrequencyCutoff) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(J, FlatSpectralDensity):
        # ∫₀^ε δ(u)du = 1/2
        inner = np.full(t.shape, 0.5 * J.gamma0, dtype=complex)
        inner[0] = 0.0
        return inner, 0.5 * J.gamma0 * t.astype(complex)

    if isinstance(J, LorentzianSpectralDensity) and cutoff.use_full_real_axis:
        a = 1j * (omega0 - J.omega_c) - J.eta
        growth = np.expm1(a * t) / a
        inner = J.coupling_squared * growth
        return inner, J.coupling_squared * (growth - t) / a

    integrand = J.memory_kernel(t, cutoff) * np.exp(1j * omega0 * t)
    inner = cumulative_trapezoid(integrand, t, initial=0.0)
    return inner, cumulative_trapezoid(inner, t, initial=0.0)

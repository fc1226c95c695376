"""
Quadrature helpers shared by the physics modules
"""

from math import factorial
from typing import Iterator, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.signal import fftconvolve

from .errors import QuadratureError

_SERIES_SWITCH = 0.5
_SERIES_TERMS = 20


def planck(omega, beta: float, omega_min: float = 0.0):
    """
    Bose-Einstein occupation 1/(e^{βω} − 1).

    Modes below ``omega_min`` (and all non-positive frequencies) carry no
    thermal occupation. ``beta = inf`` is the zero-temperature limit.
    """
    omega = np.asarray(omega, dtype=float)
    occupation = np.zeros_like(omega)
    if beta is None or np.isinf(beta):
        return occupation if occupation.ndim else float(occupation)
    if beta <= 0:
        raise ValueError(f"Inverse temperature must be positive, got {beta}")

    mask = (omega >= omega_min) & (omega > 0.0)
    occupation[mask] = 1.0 / np.expm1(beta * omega[mask])
    return occupation if occupation.ndim else float(occupation)


def _exponential_moments(theta: np.ndarray) -> np.ndarray:
    """m_k(θ) = ∫₀¹ x^k e^{iθx} dx for k = 0..3."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    moments = np.zeros((4,) + theta.shape, dtype=complex)

    small = np.abs(theta) < _SERIES_SWITCH
    if np.any(small):
        z = 1j * theta[small]
        power = np.ones_like(z)
        for p in range(_SERIES_TERMS):
            coefficient = power / factorial(p)
            for k in range(4):
                moments[k, small] += coefficient / (k + p + 1)
            power = power * z

    large = ~small
    if np.any(large):
        iz = 1j * theta[large]
        edge = np.exp(iz)
        moments[0, large] = (edge - 1.0) / iz
        for k in range(1, 4):
            moments[k, large] = (edge - k * moments[k - 1, large]) / iz

    return moments


def hermite_filon_weights(theta) -> np.ndarray:
    """
    Weights of the cubic Hermite-Filon rule on one step.

    For a step of length Δt starting at t_n and θ = ωΔt,

        ∫ G(u) e^{iωu} du ≈ Δt e^{iωt_n} [w0 G_n + w1 Δt Ġ_n + w2 G_{n+1} + w3 Δt Ġ_{n+1}]

    Returns an array of shape (4,) + θ.shape.
    """
    m0, m1, m2, m3 = _exponential_moments(theta)
    return np.array([
        2.0 * m3 - 3.0 * m2 + m0,
        m3 - 2.0 * m2 + m1,
        -2.0 * m3 + 3.0 * m2,
        m3 - m2,
    ])


def iterate_oscillatory(values: np.ndarray, derivatives: np.ndarray, dt: float,
                        frequencies) -> Iterator[Tuple[int, np.ndarray]]:
    """
    Yield (n, B_n) with B_n(ω) = ∫₀^{t_n} G(u) e^{iωu} du for every grid index.

    G is interpolated by the cubic Hermite polynomial through (G, Ġ) on each
    step, so the running integral has O(Δt⁴) local accuracy for any ω.
    """
    frequencies = np.atleast_1d(np.asarray(frequencies, dtype=float))
    w0, w1, w2, w3 = hermite_filon_weights(frequencies * dt)
    running = np.zeros(frequencies.shape, dtype=complex)
    yield 0, running.copy()

    for n in range(1, len(values)):
        phase = np.exp(1j * frequencies * ((n - 1) * dt))
        running += dt * phase * (
            w0 * values[n - 1]
            + w1 * dt * derivatives[n - 1]
            + w2 * values[n]
            + w3 * dt * derivatives[n]
        )
        yield n, running.copy()


def rotated_transforms(values: np.ndarray, derivatives: np.ndarray, dt: float,
                       frequencies) -> np.ndarray:
    """
    A_j(t_n) = e^{−iω_j t_n} B_n(ω_j) = ∫₀^{t_n} G(t_n − τ) e^{−iω_j τ} dτ.

    Returns shape (M, n_frequencies). Meant for a handful of special modes.
    """
    frequencies = np.atleast_1d(np.asarray(frequencies, dtype=float))
    out = np.zeros((len(values), frequencies.size), dtype=complex)
    for n, running in iterate_oscillatory(values, derivatives, dt, frequencies):
        out[n] = np.exp(-1j * frequencies * (n * dt)) * running
    return out


def gauss_legendre_panels(lower: float, upper: float, panels: int,
                          order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lower, upper]."""
    if upper <= lower:
        raise ValueError(f"Empty integration range [{lower}, {upper}]")
    x, w = leggauss(order)
    edges = np.linspace(lower, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def principal_value(func, lower: float, upper: float, pole: float,
                    epsabs: float = 1e-10, epsrel: float = 1e-10, limit: int = 500) -> float:
    """
    P∫_lower^upper func(x)/(x − pole) dx.

    Uses QUADPACK's Cauchy-weight rule when the pole is interior. A pole on an
    endpoint has no principal value and is rejected.
    """
    if np.isclose(pole, lower, rtol=0.0, atol=1e-14) or np.isclose(pole, upper, rtol=0.0, atol=1e-14):
        raise QuadratureError(f"Principal-value pole {pole} sits on the integration edge", float("nan"))

    if lower < pole < upper:
        value, error = integrate.quad(func, lower, upper, weight="cauchy", wvar=pole,
                                      epsabs=epsabs, epsrel=epsrel, limit=limit)
    else:
        value, error = integrate.quad(lambda x: func(x) / (x - pole), lower, upper,
                                      epsabs=epsabs, epsrel=epsrel, limit=limit)
    _check_error(error, value, epsabs, epsrel, "principal-value integral")
    return value


def fourier_quad(func, lower: float, upper: float, t: float,
                 epsabs: float = 1e-10, epsrel: float = 1e-10, limit: int = 500) -> complex:
    """∫ func(ω) e^{−iωt} dω over a finite range, oscillation handled by QUADPACK."""
    if t == 0.0:
        value, error = integrate.quad(func, lower, upper, epsabs=epsabs, epsrel=epsrel, limit=limit)
        _check_error(error, value, epsabs, epsrel, "kernel integral")
        return complex(value)

    real, err_r = integrate.quad(func, lower, upper, weight="cos", wvar=t,
                                 epsabs=epsabs, epsrel=epsrel, limit=limit)
    imag, err_i = integrate.quad(func, lower, upper, weight="sin", wvar=t,
                                 epsabs=epsabs, epsrel=epsrel, limit=limit)
    _check_error(max(err_r, err_i), abs(real) + abs(imag), epsabs, epsrel, "kernel integral")
    return complex(real, -imag)


def _check_error(error: float, value: float, epsabs: float, epsrel: float, label: str):
    # QUADPACK estimates are pessimistic; only flag gross misses
    if error > 100.0 * max(epsabs, epsrel * abs(value)) and error > 1e-6:
        raise QuadratureError(f"{label} did not converge", error)


def trapezoid_convolution(kernel: np.ndarray, signal: np.ndarray, dt: float) -> np.ndarray:
    """(k ∗ s)(t_n) = ∫₀^{t_n} k(t_n − τ) s(τ) dτ by the composite trapezoid rule."""
    kernel = np.asarray(kernel)
    signal = np.asarray(signal)
    full = fftconvolve(kernel, signal)[: len(signal)]
    return dt * (full - 0.5 * (kernel[0] * signal + kernel[: len(signal)] * signal[0]))


def cumulative(series: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative trapezoid starting from zero."""
    return integrate.cumulative_trapezoid(series, dx=dt, initial=0.0)


def cumulative_corrected(series: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative trapezoid with the Euler-Maclaurin end correction, O(Δt⁴) for smooth series."""
    slope = np.gradient(series, dt, edge_order=2)
    return cumulative(series, dt) - dt * dt / 12.0 * (slope - slope[0])

"""
Exact one-particle evolution of the system plus a finite bath
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from .coefficients import DisplacedMode, EnvInitState, SqueezedMode
from .dynamics import GaussianModeState, StateSeries
from .errors import FanoError
from .green import TimeGrid
from .quadrature import planck
from .spectral import DiscreteSpectralDensity, FrequencyCutoff, SpectralDensity

logger = logging.getLogger(__name__)

_TIME_CHUNK = 256
SNAP_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class DiscreteBathScenario:
    """
    Central mode plus N bath modes in a product Gaussian state.

    Per-mode bath moments are central: ``occupations`` is ⟨⟨c†c⟩⟩ and
    ``pairs`` is ⟨⟨cc⟩⟩, with ``means`` holding ⟨c⟩.
    """

    omega0: float
    bath: DiscreteSpectralDensity
    means: np.ndarray = field(default=None)
    occupations: np.ndarray = field(default=None)
    pairs: np.ndarray = field(default=None)

    def __post_init__(self):
        size = self.bath.frequencies.size
        for name, dtype in (("means", complex), ("occupations", float), ("pairs", complex)):
            value = getattr(self, name)
            array = np.zeros(size, dtype=dtype) if value is None else np.asarray(value, dtype=dtype)
            if array.shape != (size,):
                raise ValueError(f"{name} must have one entry per bath mode")
            object.__setattr__(self, name, array)
        if np.any(np.abs(self.pairs) ** 2 > self.occupations * (self.occupations + 1.0) + 1e-12):
            raise ValueError("Bath mode moments violate |⟨⟨cc⟩⟩|² ≤ n(n+1)")

    @classmethod
    def thermal(cls, omega0: float, bath: DiscreteSpectralDensity, beta: float,
                omega_min: float = 0.0) -> "DiscreteBathScenario":
        return cls(omega0, bath, occupations=planck(bath.frequencies, beta, omega_min))

    @classmethod
    def from_continuum(cls, J: SpectralDensity, omega0: float, n_modes: int, env: EnvInitState,
                       cutoff: Optional[FrequencyCutoff] = None) -> Tuple["DiscreteBathScenario", EnvInitState]:
        """
        Discretize J and place the special modes of ``env`` on the nearest grid modes.

        Returns the scenario and the environment rewritten with the grid
        frequencies and couplings, so both routes describe the same model.
        """
        cutoff = cutoff or FrequencyCutoff()
        bath = J.discretize(n_modes, cutoff)
        return cls.from_bath(omega0, bath, env, cutoff.omega_min)

    @classmethod
    def from_bath(cls, omega0: float, bath: DiscreteSpectralDensity, env: EnvInitState,
                  omega_min: float = 0.0) -> Tuple["DiscreteBathScenario", EnvInitState]:
        means = np.zeros(bath.frequencies.size, dtype=complex)
        occupations = planck(bath.frequencies, env.beta, omega_min)
        pairs = np.zeros(bath.frequencies.size, dtype=complex)
        used = set()

        def snap(mode) -> int:
            index = int(np.argmin(np.abs(bath.frequencies - mode.omega)))
            if index in used:
                raise ValueError(f"Two special modes snap onto the bath mode at ω = {bath.frequencies[index]:.6g}")
            used.add(index)
            omega, coupling = float(bath.frequencies[index]), complex(bath.couplings[index])
            if abs(omega - mode.omega) > SNAP_TOLERANCE or abs(coupling - mode.coupling) > SNAP_TOLERANCE:
                logger.warning("Special mode (ω = %.6g, |g| = %.6g) replaced by the bath mode (ω = %.6g, |g| = %.6g)",
                               mode.omega, abs(mode.coupling), omega, abs(coupling))
            return index

        displaced = []
        for mode in env.displaced:
            k = snap(mode)
            means[k] = mode.alpha
            displaced.append(DisplacedMode(float(bath.frequencies[k]), complex(bath.couplings[k]), mode.alpha))

        squeezed = []
        for mode in env.squeezed:
            k = snap(mode)
            snapped = SqueezedMode(float(bath.frequencies[k]), complex(bath.couplings[k]), mode.pair, mode.occupation)
            pairs[k] = mode.pair
            occupations[k] = env.mode_occupation(snapped, omega_min)
            squeezed.append(snapped)

        snapped_env = EnvInitState(beta=env.beta, displaced=tuple(displaced), squeezed=tuple(squeezed))
        return cls(omega0, bath, means, occupations, pairs), snapped_env

    @property
    def mode_count(self) -> int:
        return self.bath.frequencies.size

    @property
    def recurrence_time(self) -> float:
        return self.bath.recurrence_time

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        """One-particle matrix h with h₀₀ = ω0, h₀ⱼ = g_j, hⱼⱼ = ω_j."""
        size = self.mode_count + 1
        h = np.zeros((size, size), dtype=complex)
        h[0, 0] = self.omega0
        h[0, 1:] = self.bath.couplings
        h[1:, 0] = np.conj(self.bath.couplings)
        h[np.arange(1, size), np.arange(1, size)] = self.bath.frequencies
        return h

    @cached_property
    def eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        return eigh(self.hamiltonian)

    def initial_vectors(self, state0: GaussianModeState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(means, central occupations, central pairs) of all modes, system first."""
        means = np.concatenate([[state0.mean], self.means])
        occupations = np.concatenate([[state0.central_occupation], self.occupations])
        pairs = np.concatenate([[state0.central_pair], self.pairs])
        return means, occupations, pairs


def one_particle_propagator(scenario: DiscreteBathScenario, t: float) -> np.ndarray:
    """U(t) = exp(−iht) from the cached eigendecomposition."""
    if t < 0:
        raise ValueError("Propagator is evaluated for t >= 0 only")
    energies, vectors = scenario.eigensystem
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


def _propagator_rows(scenario: DiscreteBathScenario, times: np.ndarray) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield (slice, rows) with rows[k, j] = U₀ⱼ(t_k), in time chunks."""
    energies, vectors = scenario.eigensystem
    first = vectors[0, :]
    adjoint = vectors.conj().T
    for start in range(0, times.size, _TIME_CHUNK):
        chunk = slice(start, min(start + _TIME_CHUNK, times.size))
        phases = np.exp(-1j * np.outer(times[chunk], energies))
        yield chunk, (phases * first) @ adjoint


def oracle_green(scenario: DiscreteBathScenario, grid: TimeGrid) -> np.ndarray:
    """G(t) = [U(t)]₀₀ = Σ_m |V₀ₘ|² e^{−iε_m t}."""
    energies, vectors = scenario.eigensystem
    weights = np.abs(vectors[0, :]) ** 2
    times = grid.times
    values = np.empty(times.size, dtype=complex)
    for start in range(0, times.size, _TIME_CHUNK):
        chunk = times[start:start + _TIME_CHUNK]
        values[start:start + _TIME_CHUNK] = np.exp(-1j * np.outer(chunk, energies)) @ weights
    return values


def oracle_moments(scenario: DiscreteBathScenario, state0: GaussianModeState, grid: TimeGrid) -> StateSeries:
    """Exact central-mode moments of the product Gaussian initial state."""
    times = grid.times
    if times[-1] > 0.5 * scenario.recurrence_time:
        logger.warning(
            "Oracle grid reaches t = %.4g beyond half the recurrence time %.4g",
            times[-1], scenario.recurrence_time,
        )
    means, occupations, pairs = scenario.initial_vectors(state0)
    mean = np.empty(times.size, dtype=complex)
    pair = np.empty(times.size, dtype=complex)
    occupation = np.empty(times.size)

    for chunk, rows in _propagator_rows(scenario, times):
        amplitude = rows @ means
        mean[chunk] = amplitude
        pair[chunk] = rows ** 2 @ pairs + amplitude ** 2
        occupation[chunk] = np.abs(rows) ** 2 @ occupations + np.abs(amplitude) ** 2
    return StateSeries(times, mean, pair, occupation)


def total_excitation(scenario: DiscreteBathScenario, state0: GaussianModeState, t: float) -> float:
    """Σ_k ⟨b_k†b_k⟩ over system and bath at time t."""
    propagator = one_particle_propagator(scenario, t)
    means, occupations, _ = scenario.initial_vectors(state0)
    return float(np.sum(np.abs(propagator) ** 2 @ occupations) + np.sum(np.abs(propagator @ means) ** 2))


def oracle_global_gibbs_expectation(scenario: DiscreteBathScenario, beta: float, omega_min: float = 0.0) -> float:
    """⟨a†a⟩ of the global Gibbs state: Σ_k |V₀ₖ|² n_B(ε_k)."""
    if beta is None or not beta > 0:
        raise ValueError(f"Inverse temperature must be positive, got {beta}")
    energies, vectors = scenario.eigensystem
    if np.any(energies <= 0):
        raise FanoError(f"One-particle spectrum has a non-positive level {energies.min():.6g}; no Gibbs state")
    return float(np.abs(vectors[0, :]) ** 2 @ planck(energies, beta, omega_min))

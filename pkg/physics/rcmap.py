"""
Reaction-coordinate mapping of a Lorentzian bath and the two-mode Lindblad route
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .coefficients import EnvInitState
from .dynamics import GaussianModeState, StateSeries, integrate_rk4, propagate_exact
from .errors import UnsupportedVariantError
from .green import TimeGrid, solve_green
from .quadrature import planck
from .spectral import FrequencyCutoff, LorentzianSpectralDensity, SpectralDensity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RcModel:
    """System + reaction coordinate with a flat residual bath acting on the RC."""

    coupling: float
    omega_rc: float
    residual_rate: float
    w_plus: float
    w_minus: float
    beta: float

    def __post_init__(self):
        if self.w_plus < 0:
            raise ValueError(f"W+ must be nonnegative, got {self.w_plus}")
        if abs((self.w_minus - self.w_plus) - self.residual_rate) > 1e-12 * max(1.0, self.w_minus):
            raise ValueError("Lindblad rates must satisfy W− − W+ = γ̃0")

    @property
    def rc_occupation(self) -> float:
        """Thermal RC occupation consistent with the rates, W+/(W− − W+)."""
        return self.w_plus / self.residual_rate if self.residual_rate > 0 else 0.0

    def drift(self, omega0: float) -> np.ndarray:
        """Drift matrix A of d⟨(a, b)⟩/dt = A⟨(a, b)⟩."""
        return np.array([
            [-1j * omega0, -1j * self.coupling],
            [-1j * self.coupling, -1j * self.omega_rc - 0.5 * self.residual_rate],
        ])


def map_lorentzian(gamma0: float, eta: float, omega_c: float, beta: float,
                   omega_min: float = 0.0) -> RcModel:
    """|g|² = γ0η/2, ω_RC = ω_c, γ̃0 = 2η, W+ = γ̃0 n_B(ω_RC), W− = γ̃0(n_B + 1)."""
    if eta <= 0 or gamma0 <= 0:
        raise ValueError(f"Reaction-coordinate mapping needs gamma0, eta > 0, got {gamma0}, {eta}")
    residual = 2.0 * eta
    occupation = planck(omega_c, beta, omega_min)
    w_plus = residual * occupation
    return RcModel(
        coupling=float(np.sqrt(0.5 * gamma0 * eta)),
        omega_rc=float(omega_c),
        residual_rate=residual,
        w_plus=w_plus,
        w_minus=w_plus + residual,
        beta=beta,
    )


def map_spectral_density(J: SpectralDensity, beta: float, omega_min: float = 0.0) -> RcModel:
    if not isinstance(J, LorentzianSpectralDensity):
        raise UnsupportedVariantError(f"Reaction-coordinate mapping is defined for Lorentzian densities, not {J.kind}")
    return map_lorentzian(J.gamma0, J.eta, J.omega_c, beta, omega_min)


@dataclass(frozen=True, eq=False)
class RcTrajectory:
    """Central-mode marginal plus RC occupation and joint positivity diagnostics."""

    central: StateSeries
    rc_occupation: np.ndarray
    total_excitation: np.ndarray
    min_symplectic: np.ndarray

    def csv_columns(self) -> Dict[str, np.ndarray]:
        columns = dict(self.central.csv_columns())
        columns.update({"n_rc": self.rc_occupation, "nu_min": self.min_symplectic})
        return columns


def _pack(mean: np.ndarray, normal: np.ndarray, anomalous: np.ndarray) -> np.ndarray:
    return np.concatenate([mean, normal.ravel(), anomalous.ravel()])


def _unpack(y: np.ndarray):
    return y[:2], y[2:6].reshape(2, 2), y[6:10].reshape(2, 2)


def joint_symplectic_eigenvalues(mean: np.ndarray, normal: np.ndarray, anomalous: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of the two-mode covariance built from central moments."""
    delta_n = normal - np.outer(np.conj(mean), mean)
    delta_m = anomalous - np.outer(mean, mean)
    identity = 0.5 * np.eye(2)
    sigma = np.block([[delta_n.T + identity, delta_m], [np.conj(delta_m), delta_n + identity]])
    form = np.diag([1.0, 1.0, -1.0, -1.0])
    return np.sort(np.abs(np.linalg.eigvals(form @ sigma)))[::2]


def simulate_rc(model: RcModel, omega0: float, state0: GaussianModeState, grid: TimeGrid,
                rc_state0: Optional[GaussianModeState] = None, substeps: int = 1) -> RcTrajectory:
    """
    Evolve ⟨v⟩, N_jk = ⟨v_j†v_k⟩ and M_jk = ⟨v_jv_k⟩ for v = (a, b):

        d⟨v⟩ = A⟨v⟩,  dN = A*N + NAᵀ + diag(0, W+),  dM = AM + MAᵀ
    """
    if rc_state0 is None:
        rc_state0 = GaussianModeState.thermal(model.rc_occupation)
    drift = model.drift(omega0)
    drift_conj = np.conj(drift)
    noise = np.diag([0.0, model.w_plus]).astype(complex)

    mean = np.array([state0.mean, rc_state0.mean])
    normal = np.outer(np.conj(mean), mean)
    normal[0, 0], normal[1, 1] = state0.occupation, rc_state0.occupation
    anomalous = np.outer(mean, mean)
    anomalous[0, 0], anomalous[1, 1] = state0.pair, rc_state0.pair

    def rate(_t, y):
        m, n, s = _unpack(y)
        return _pack(drift @ m, drift_conj @ n + n @ drift.T + noise, drift @ s + s @ drift.T)

    solution = integrate_rk4(rate, _pack(mean, normal, anomalous), grid.times, substeps)
    means = solution[:, :2]
    normals = solution[:, 2:6].reshape(-1, 2, 2)
    anomalous_series = solution[:, 6:10].reshape(-1, 2, 2)

    nu_min = np.array([
        joint_symplectic_eigenvalues(means[k], normals[k], anomalous_series[k]).min()
        for k in range(grid.steps)
    ])
    if np.any(nu_min < 0.5 - 1e-9):
        first = int(np.flatnonzero(nu_min < 0.5 - 1e-9)[0])
        logger.warning("Two-mode state positivity violated at t = %.6g (ν = %.12g)", grid.times[first], nu_min[first])

    central = StateSeries(grid.times, means[:, 0], anomalous_series[:, 0, 0], normals[:, 0, 0].real)
    return RcTrajectory(
        central=central,
        rc_occupation=normals[:, 1, 1].real,
        total_excitation=(normals[:, 0, 0] + normals[:, 1, 1]).real,
        min_symplectic=nu_min,
    )


def rc_steady_occupation(model: RcModel, omega0: float) -> float:
    """Central occupation of the two-mode Lindblad steady state (Lyapunov solve)."""
    drift = model.drift(omega0)
    noise = np.diag([0.0, model.w_plus]).astype(complex)
    normal = solve_continuous_lyapunov(np.conj(drift), -noise)
    return float(normal[0, 0].real)


@dataclass
class RcComparison:
    """Deviation between the exact and reaction-coordinate central moments."""

    eta: float
    gamma0: float
    max_abs: Dict[str, float]
    l2: Dict[str, float]
    relative: Dict[str, float]

    @property
    def worst_relative(self) -> float:
        return max(self.relative.values())

    def report(self) -> Dict:
        return {
            "eta": self.eta,
            "gamma0": self.gamma0,
            "max_abs": self.max_abs,
            "l2": self.l2,
            "relative": self.relative,
        }


def _deviation(exact: np.ndarray, other: np.ndarray, dt: float):
    difference = np.abs(exact - other)
    scale = max(float(np.max(np.abs(exact))), 1e-12)
    return float(np.max(difference)), float(np.sqrt(np.sum(difference ** 2) * dt)), float(np.max(difference) / scale)


def compare_exact_vs_rc(J: SpectralDensity, omega0: float, beta: float, state0: GaussianModeState,
                        grid: TimeGrid, cutoff: Optional[FrequencyCutoff] = None) -> RcComparison:
    """
    Run both routes on one Lorentzian scenario and report the moment deviations.

    The exact route skips the master-equation coefficients, so strong coupling
    with zeros of G is allowed.
    """
    cutoff = cutoff or FrequencyCutoff()
    model = map_spectral_density(J, beta, cutoff.omega_min)

    green = solve_green(J, omega0, grid, cutoff)
    exact = propagate_exact(state0, green, J, EnvInitState(beta=beta), cutoff)
    rc = simulate_rc(model, omega0, state0, grid).central

    max_abs, l2, relative = {}, {}, {}
    for name in ("mean", "pair", "occupation"):
        max_abs[name], l2[name], relative[name] = _deviation(getattr(exact, name), getattr(rc, name), grid.dt)
    return RcComparison(J.eta, J.gamma0, max_abs, l2, relative)


def rc_deviation_scan(etas: Sequence[float], omega0: float, omega_c: float, beta: float,
                      state0: GaussianModeState, duration: float, dt: float,
                      gamma0: Optional[float] = None, coupling_product: Optional[float] = None,
                      cutoff: Optional[FrequencyCutoff] = None) -> List[RcComparison]:
    """
    compare_exact_vs_rc over several widths, either at fixed γ0 or at fixed γ0η.
    """
    if (gamma0 is None) == (coupling_product is None):
        raise ValueError("Give exactly one of gamma0 or coupling_product")
    grid = TimeGrid.spanning(duration, dt)
    results = []
    for eta in etas:
        rate = gamma0 if gamma0 is not None else coupling_product / eta
        J = LorentzianSpectralDensity(rate, eta, omega_c)
        results.append(compare_exact_vs_rc(J, omega0, beta, state0, grid, cutoff))
    return results

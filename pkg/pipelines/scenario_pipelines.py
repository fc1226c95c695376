"""
Scenario pipelines for the Fano-Anderson simulation engine
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Scenario
from physics import (
    DiscreteBathScenario,
    EnvInitState,
    FlatSpectralDensity,
    LorentzianSpectralDensity,
    SemiclassicalMode,
    build_coefficients,
    compare_exact_vs_rc,
    green_second_order,
    markov_limit,
    ness_state,
    non_markovian_witness,
    omega_gamma,
    oracle_global_gibbs_expectation,
    oracle_green,
    oracle_moments,
    propagate_closed_form,
    propagate_ode,
    random_gaussian_states,
    renormalized_force,
    renormalized_force_rates,
    resonance_sweep,
    second_order_lorentzian,
    semiclassical_scaling,
    simulate_rc,
    solve_green,
    steady_excitation,
    steady_state,
    thermodynamics,
    volterra_convergence,
)
from physics.driving import drive_coefficients
from physics.rcmap import map_spectral_density, rc_deviation_scan, rc_steady_occupation
from physics.steady import decayed_index
from physics.thermo import gibbs_residual_max
from tools import make_check

logger = logging.getLogger(__name__)

ORDER_ERROR_FLOOR = 1e-11


@dataclass
class PipelineResult:
    """Everything one pipeline run produces, filled in step by step."""

    name: str
    headline: Dict[str, float] = field(default_factory=dict)
    derived: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    tables: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)

    def add_check(self, name: str, value: Optional[float], tolerance: float, mode: str = "max"):
        self.checks[name] = make_check(None if value is None else float(value), float(tolerance), mode)
        if not self.checks[name]["passed"]:
            logger.warning("Check %s failed: value %s, tolerance %.3g", name, value, tolerance)

    def add_table(self, name: str, columns: Dict[str, np.ndarray]):
        self.tables[name] = columns

    @property
    def passed(self) -> bool:
        return all(check["passed"] for check in self.checks.values())


@dataclass
class _Trajectory:
    green: Any
    coeffs: Any
    states: Any


class ScenarioPipelines:
    """Factory of the named pipelines; each fills a PipelineResult from a built Scenario."""

    @staticmethod
    def get(name: str) -> Callable[[Scenario, PipelineResult], PipelineResult]:
        pipelines = {
            "simulate": ScenarioPipelines.simulate,
            "steady": ScenarioPipelines.steady,
            "ness": ScenarioPipelines.ness,
            "rcmap": ScenarioPipelines.rcmap,
            "oracle-check": ScenarioPipelines.oracle_check,
        }
        if name not in pipelines:
            raise ValueError(f"Unknown pipeline {name!r}; choose from {sorted(pipelines)}")
        return pipelines[name]

    @staticmethod
    def _trajectory(scenario: Scenario, result: PipelineResult,
                    environment: Optional[EnvInitState] = None) -> _Trajectory:
        """Green function, coefficients and moments, with their tables."""
        cfg = scenario.config.solver
        tol = scenario.tolerances
        J = scenario.spectral_density
        environment = environment or scenario.environment

        green = solve_green(J, scenario.omega0, scenario.grid, scenario.cutoff, cfg.green_method)
        result.derived["green_method"] = green.method
        result.add_table("green", green.csv_columns())

        coeffs = build_coefficients(green, J, environment, scenario.cutoff, cfg.panel_width, tol.gamma_floor)
        if scenario.drive is not None:
            coeffs = drive_coefficients(coeffs, green, scenario.drive)
        result.add_table("coefficients", coeffs.csv_columns())

        if cfg.propagation == "ode":
            states = propagate_ode(scenario.initial_state, coeffs, cfg.substeps)
        else:
            states = propagate_closed_form(scenario.initial_state, green, coeffs)
        result.add_table("moments", states.csv_columns())

        if cfg.cross_check:
            other = (propagate_closed_form(scenario.initial_state, green, coeffs) if cfg.propagation == "ode"
                     else propagate_ode(scenario.initial_state, coeffs, cfg.substeps))
            deviation = max(states.max_deviation(other).values())
            result.derived["ode_deviation"] = deviation
            result.add_check("ode_agreement", deviation, tol.ode_agreement)

        violation = states.positivity_violation(tol.positivity)
        result.derived["positivity_violation"] = None if violation is None else list(violation)
        result.add_check("positivity", float(np.min(states.symplectic_eigenvalues) - 0.5), tol.positivity, "min")
        return _Trajectory(green, coeffs, states)

    @staticmethod
    def simulate(scenario: Scenario, result: PipelineResult) -> PipelineResult:
        """Transient dynamics and the work/heat/entropy ledger, plus optional coupling studies."""
        tol = scenario.tolerances
        J = scenario.spectral_density
        run = ScenarioPipelines._trajectory(scenario, result)
        coeffs, states = run.coeffs, run.states

        if isinstance(J, LorentzianSpectralDensity):
            result.derived["negative_axis_weight"] = J.negative_axis_weight()

        record = thermodynamics(coeffs, states)
        result.add_table("thermo", record.csv_columns())
        result.add_check("first_law", record.first_law_residual, tol.first_law)
        result.derived["entropy_production_coverage"] = record.coverage

        thermal = scenario.environment.is_thermal and scenario.drive is None
        if thermal:
            heat_scale = max(1.0, float(np.max(np.abs(record.heat))))
            result.add_check("heat_split", record.heat_split_residual / heat_scale, tol.heat_split)
            if np.any(coeffs.excitation_defined):
                result.add_check("gibbs_fixed_point", gibbs_residual_max(coeffs), tol.gibbs_residual)

        if isinstance(J, FlatSpectralDensity):
            deviation = max(float(np.max(np.abs(coeffs.omega_r - scenario.omega0))),
                            float(np.max(np.abs(coeffs.gamma - J.gamma0))))
            result.add_check("flat_coefficients", deviation, tol.force_identity)
            if thermal:
                work_excess = float(np.max(np.abs(record.work) - tol.work_vanishing * np.abs(record.heat)))
                result.add_check("work_vanishing", work_excess, 1e-12)
                result.add_check("entropy_production_nonnegative",
                                 float(np.nanmin(record.entropy_production_rate)), tol.entropy_production, "min")
                if scenario.config.solver.random_states:
                    ScenarioPipelines._random_state_study(scenario, run, result)

        if (scenario.config.solver.convergence_check and isinstance(J, LorentzianSpectralDensity)
                and scenario.cutoff.use_full_real_axis):
            ScenarioPipelines._convergence_study(scenario, result)

        witness = non_markovian_witness(record, tol.witness)
        result.derived["witness"] = None if witness is None else {"time": witness[0], "sigma": witness[1]}
        if scenario.config.expect_witness:
            result.add_check("non_markovian_witness", None if witness is None else witness[1], -tol.witness)

        if scenario.drive is not None:
            ScenarioPipelines._check_drive(scenario, run, result)
        if scenario.config.second_order is not None:
            ScenarioPipelines._second_order_study(scenario, result)
        if scenario.config.semiclassical is not None:
            ScenarioPipelines._semiclassical_study(scenario, result)

        sigma = record.entropy_production_rate
        result.headline.update({
            "n_final": float(states.occupation[-1]),
            "omega_r_final": float(coeffs.omega_r[-1]),
            "gamma_final": float(coeffs.gamma[-1]),
            "work_total": float(record.work[-1]),
            "heat_total": float(record.heat[-1]),
            "dissipative_heat_total": float(record.dissipative_heat[-1]),
            "sigma_min": float(np.nanmin(sigma)) if np.any(np.isfinite(sigma)) else float("nan"),
            "first_law_residual": record.first_law_residual,
        })
        return result

    @staticmethod
    def _check_drive(scenario: Scenario, run: _Trajectory, result: PipelineResult):
        tol = scenario.tolerances
        drive = scenario.drive.sample(run.green.times)
        force = renormalized_force(run.green, scenario.drive)
        force_rates = renormalized_force_rates(run.green, scenario.drive)
        result.add_check("force_forms", float(np.max(np.abs(force - force_rates))), tol.force_forms)
        if isinstance(scenario.spectral_density, FlatSpectralDensity):
            result.add_check("flat_force_identity", float(np.max(np.abs(force - drive))), tol.force_identity)
        result.add_table("drive", {
            "t": run.green.times,
            "re_l": drive.real,
            "im_l": drive.imag,
            "re_fr": force.real,
            "im_fr": force.imag,
        })

    @staticmethod
    def _random_state_study(scenario: Scenario, run: _Trajectory, result: PipelineResult):
        """Entropy production over a seeded ensemble of initial Gaussian states."""
        cfg = scenario.config.solver
        worst = np.inf
        for state in random_gaussian_states(cfg.random_states, cfg.seed):
            record = thermodynamics(run.coeffs, propagate_closed_form(state, run.green, run.coeffs))
            worst = min(worst, float(np.nanmin(record.entropy_production_rate)))
        result.derived["random_states"] = {"count": cfg.random_states, "seed": cfg.seed, "sigma_min": worst}
        result.add_check("random_state_entropy_production", worst, scenario.tolerances.entropy_production, "min")

    @staticmethod
    def _convergence_study(scenario: Scenario, result: PipelineResult):
        """Volterra solver against the closed form on the grid and the grid refined twice."""
        order, coarse, fine = volterra_convergence(scenario.spectral_density, scenario.omega0, scenario.grid,
                                                   scenario.cutoff)
        result.derived["volterra_convergence"] = {"order": order, "error": coarse, "refined_error": fine}
        if fine < ORDER_ERROR_FLOOR:
            logger.warning("Volterra error %.2e is at round-off; convergence order not tested", fine)
            return
        result.add_check("convergence_order", order - 2.0, scenario.tolerances.convergence_order, "within")

    @staticmethod
    def _second_order_study(scenario: Scenario, result: PipelineResult):
        """Residual of the second-order ω_r against the exact one at each λ, and the Markov constants."""
        tol = scenario.tolerances
        J, omega0, grid, cutoff = scenario.spectral_density, scenario.omega0, scenario.grid, scenario.cutoff
        lambdas = scenario.config.second_order.lambdas

        residuals = []
        for lam in lambdas:
            exact = solve_green(J.scaled(lam), omega0, grid, cutoff)
            omega_exact, _ = omega_gamma(exact)
            _, log_derivative = green_second_order(J, omega0, lam, grid, cutoff)
            residuals.append(float(np.max(np.abs(omega_exact + log_derivative.imag))))
        result.derived["second_order"] = {"lambdas": list(lambdas), "omega_r_residual": residuals}

        expected = (lambdas[0] / lambdas[1]) ** 4
        ratio = residuals[0] / residuals[1] if residuals[1] > 0 else None
        result.add_check("second_order_scaling", None if ratio is None else ratio - expected, expected / 4.0, "within")

        if isinstance(J, LorentzianSpectralDensity) and cutoff.use_full_real_axis:
            deviations = []
            for lam in lambdas:
                gamma_m, omega_m = markov_limit(J, omega0, lam, cutoff)
                omega_late, gamma_late = second_order_lorentzian(
                    lam ** 2 * J.gamma0, J.eta, omega0 - J.omega_c, omega0, 40.0 / J.eta
                )
                deviations.append(max(abs(float(omega_late) - omega_m), abs(float(gamma_late) - gamma_m)))
            result.add_check("markov_limit", max(deviations), tol.markov_limit)

    @staticmethod
    def _semiclassical_study(scenario: Scenario, result: PipelineResult):
        tol = scenario.tolerances
        cfg = scenario.config.semiclassical
        modes = [SemiclassicalMode(m.omega, m.coupling, m.phase) for m in cfg.modes]
        report = semiclassical_scaling(
            scenario.spectral_density, scenario.omega0, modes, cfg.epsilon, cfg.lambdas,
            scenario.grid, scenario.environment.beta, scenario.cutoff,
        )
        result.add_table("semiclassical", {
            "lambda": np.array(report.lambdas),
            "max_gamma": np.array(report.max_gamma),
            "max_gamma_N": np.array(report.max_gamma_excitation),
            "heat": np.array(report.heat),
            "force_deviation": np.array(report.force_deviation),
        })
        result.derived["semiclassical_exponents"] = report.exponents
        for name, exponent in report.exponents.items():
            result.add_check(f"semiclassical_exponent_{name}", exponent - 2.0, tol.scaling_exponent, "within")

        order = np.argsort(report.lambdas)[::-1]
        deviations = np.asarray(report.force_deviation)[order]
        result.add_check("semiclassical_force_monotone", int(np.sum(np.diff(deviations) >= 0)), 0)

    @staticmethod
    def steady(scenario: Scenario, result: PipelineResult) -> PipelineResult:
        """Long-time occupation from three routes and the renormalized Gibbs state."""
        tol = scenario.tolerances
        J, omega0, beta = scenario.spectral_density, scenario.omega0, scenario.environment.beta
        run = ScenarioPipelines._trajectory(scenario, result)
        coeffs, states = run.coeffs, run.states

        index = decayed_index(run.green, tol.decayed_green)
        result.derived["decayed_time"] = None if index is None else float(run.green.times[index])
        if index is None:
            logger.warning("|G| stays above %.1e on the grid; long-time values are not converged", tol.decayed_green)

        limits = steady_state(coeffs)
        occupation_time = float(coeffs.noise[-1])
        occupation_frequency, normalization = steady_excitation(
            J, omega0, beta, scenario.cutoff, tol.quadrature_epsabs, tol.quadrature_epsrel
        )
        result.add_check("normalization", normalization - 1.0, tol.normalization, "within")
        result.add_check("steady_time_vs_frequency", abs(occupation_time - occupation_frequency), tol.steady_agreement)

        occupation_oracle = None
        if scenario.config.oracle is not None:
            bath, _ = DiscreteBathScenario.from_continuum(
                J, omega0, scenario.config.oracle.n_modes, EnvInitState(beta=beta), scenario.oracle_cutoff
            )
            occupation_oracle = oracle_global_gibbs_expectation(bath, beta, scenario.oracle_cutoff.omega_min)
            result.add_check("steady_oracle_vs_time", abs(occupation_oracle - occupation_time), tol.steady_agreement)
            result.add_check("steady_oracle_vs_frequency", abs(occupation_oracle - occupation_frequency),
                             tol.steady_agreement)

        final = states.final
        result.add_check("gibbs_occupation", abs(final.central_occupation - limits.gibbs_occupation),
                         tol.gibbs_occupation)
        if np.any(coeffs.excitation_defined) and scenario.drive is None and scenario.environment.is_thermal:
            result.add_check("gibbs_fixed_point", gibbs_residual_max(coeffs), tol.gibbs_residual)

        if J.continuum:
            gamma_m, omega_m = markov_limit(J, omega0, 1.0, scenario.cutoff)
            result.derived["markov"] = {"gamma": gamma_m, "omega_r": omega_m}

        result.derived["steady"] = {
            "nbar_time": occupation_time,
            "nbar_frequency": occupation_frequency,
            "nbar_oracle": occupation_oracle,
            "normalization": normalization,
            "omega_r_bar": limits.omega_r,
            "gamma_bar": limits.gamma,
            "beta_r_bar": limits.beta_r,
            "gibbs_exponent": limits.exponent,
        }
        result.headline.update({
            "nbar": occupation_time,
            "nbar_frequency": occupation_frequency,
            "nbar_oracle": float("nan") if occupation_oracle is None else occupation_oracle,
            "omega_r_bar": limits.omega_r,
            "gamma_bar": limits.gamma,
            "beta_r_bar": limits.beta_r,
        })
        return result

    @staticmethod
    def ness(scenario: Scenario, result: PipelineResult) -> PipelineResult:
        """Transient approach to the displaced Gibbs state and its constant fluxes."""
        tol = scenario.tolerances
        J, omega0 = scenario.spectral_density, scenario.omega0
        modes = scenario.environment.displaced
        if not modes:
            raise ValueError("The ness pipeline needs at least one displaced environment mode")

        run = ScenarioPipelines._trajectory(scenario, result)
        record = thermodynamics(run.coeffs, run.states)
        result.add_table("thermo", record.csv_columns())
        result.add_check("first_law", record.first_law_residual, tol.first_law)

        limits = steady_state(run.coeffs)
        asymptotic = ness_state(J, omega0, modes, limits, run.green.times, scenario.cutoff)
        result.add_table("ness", asymptotic.csv_columns())
        result.add_check("ness_unitarity", asymptotic.unitarity_residual, tol.ness_unitarity)

        index = decayed_index(run.green, tol.decayed_green)
        convergence = None
        force_gap = None
        if index is None:
            logger.warning("|G| stays above %.1e on the grid; NESS convergence not tested", tol.decayed_green)
        else:
            states = run.states
            mean_gap = np.abs(states.mean[index:] - asymptotic.displacement[index:])
            occupation_gap = np.abs(states.occupation[index:]
                                    - (limits.occupation + np.abs(asymptotic.displacement[index:]) ** 2))
            convergence = float(max(np.max(mean_gap), np.max(occupation_gap)))
            force_gap = float(np.max(np.abs(run.coeffs.force[index:] - asymptotic.force[index:])))
            result.derived["ness_force_gap"] = force_gap
        result.add_check("ness_convergence", convergence, tol.ness_convergence)
        result.add_check("ness_force", force_gap, tol.ness_convergence)

        report = asymptotic.report()
        fluxes = asymptotic.fluxes
        if fluxes is not None:
            result.add_check("flux_balance", abs(fluxes.heat_rate + fluxes.work_rate), tol.flux_balance)
            if np.isfinite(fluxes.entropy_production_rate):
                result.add_check("sigmadot_nonnegative", fluxes.entropy_production_rate, 0.0, "min")
                result.add_check("sigmadot_clausius",
                                 abs(fluxes.entropy_production_rate + limits.beta_r * fluxes.heat_rate),
                                 tol.flux_balance)

            resonance = scenario.config.ness.resonance
            if resonance is not None:
                mode = modes[0]
                sweep = resonance_sweep(J, omega0, mode.coupling, mode.alpha, resonance.values(), limits,
                                        scenario.cutoff)
                asymptotic.resonance = sweep
                report = asymptotic.report()
                result.add_table("resonance", {
                    "omega_d": sweep.frequencies,
                    "sigmadot": sweep.entropy_production_rates,
                })
                gap = None if sweep.root_frequency is None else abs(sweep.peak_frequency - sweep.root_frequency)
                result.add_check("resonance_peak", gap, sweep.grid_step)

        result.derived["ness"] = report
        result.headline.update({
            "nbar": limits.occupation,
            "omega_r_bar": limits.omega_r,
            "gamma_bar": limits.gamma,
            "ness_deviation": float("nan") if convergence is None else convergence,
        })
        if fluxes is not None:
            result.headline.update({
                "Qdot": fluxes.heat_rate,
                "Wdot": fluxes.work_rate,
                "sigmadot": fluxes.entropy_production_rate,
            })
        return result

    @staticmethod
    def rcmap(scenario: Scenario, result: PipelineResult) -> PipelineResult:
        """Reaction-coordinate route against the exact route on one Lorentzian scenario."""
        tol = scenario.tolerances
        J, omega0, beta = scenario.spectral_density, scenario.omega0, scenario.environment.beta
        cutoff = scenario.cutoff
        model = map_spectral_density(J, beta, cutoff.omega_min)

        constants_gap = max(abs(model.coupling ** 2 - 0.5 * J.gamma0 * J.eta),
                            abs(model.omega_rc - J.omega_c),
                            abs(model.residual_rate - 2.0 * J.eta))
        result.add_check("rc_constants", constants_gap, 1e-12 * max(1.0, J.gamma0 * J.eta))
        result.derived["rc_model"] = {
            "coupling_squared": model.coupling ** 2,
            "omega_rc": model.omega_rc,
            "residual_rate": model.residual_rate,
            "w_plus": model.w_plus,
            "w_minus": model.w_minus,
            "steady_occupation": rc_steady_occupation(model, omega0),
        }

        comparison = compare_exact_vs_rc(J, omega0, beta, scenario.initial_state, scenario.grid, cutoff)
        result.derived["rc_comparison"] = comparison.report()
        result.add_check("rc_relative", comparison.worst_relative, tol.rc_relative)

        trajectory = simulate_rc(model, omega0, scenario.initial_state, scenario.grid,
                                 substeps=scenario.config.solver.substeps)
        result.add_table("rc", trajectory.csv_columns())

        etas = scenario.config.rcmap.etas
        if etas:
            scan = rc_deviation_scan(etas, omega0, J.omega_c, beta, scenario.initial_state,
                                     scenario.grid.duration, scenario.grid.dt, gamma0=J.gamma0, cutoff=cutoff)
            ordered = sorted(scan, key=lambda c: c.eta, reverse=True)
            worst = np.array([c.worst_relative for c in ordered])
            result.add_table("rc_scan", {"eta": np.array([c.eta for c in ordered]), "relative_deviation": worst})
            result.add_check("rc_monotone", int(np.sum(np.diff(worst) > 0)), 0)

        result.headline.update({
            "rc_deviation": comparison.worst_relative,
            "rc_coupling_squared": model.coupling ** 2,
        })
        return result

    @staticmethod
    def oracle_check(scenario: Scenario, result: PipelineResult) -> PipelineResult:
        """Exact finite-bath evolution against the master-equation route."""
        tol = scenario.tolerances
        if scenario.config.oracle is None:
            raise ValueError("The oracle-check pipeline needs an 'oracle' section")
        if scenario.drive is not None:
            logger.warning("The finite-bath oracle ignores the external drive")

        bath, environment = DiscreteBathScenario.from_continuum(
            scenario.spectral_density, scenario.omega0, scenario.config.oracle.n_modes,
            scenario.environment, scenario.oracle_cutoff,
        )
        run = ScenarioPipelines._trajectory(scenario, result, environment)

        grid = scenario.grid
        exact_green = oracle_green(bath, grid)
        exact = oracle_moments(bath, scenario.initial_state, grid)
        count = int(np.count_nonzero(grid.times < 0.5 * bath.recurrence_time))
        result.derived["recurrence_time"] = bath.recurrence_time
        result.derived["compared_samples"] = count

        columns = {"t": grid.times, "re_G": exact_green.real, "im_G": exact_green.imag}
        columns.update({k: v for k, v in exact.csv_columns().items() if k != "t"})
        result.add_table("oracle", columns)

        deviations = {"green": float(np.max(np.abs(run.green.values[:count] - exact_green[:count])))}
        deviations.update(run.states.max_deviation(exact, count))
        result.derived["oracle_deviation"] = deviations
        for name, value in deviations.items():
            result.add_check(f"oracle_{name}", value, tol.oracle_moments)

        result.headline.update({f"deviation_{name}": value for name, value in deviations.items()})
        return result

    @staticmethod
    def summarize_sweep(parameter: str, values: Sequence[float],
                        points: Sequence[Tuple[Optional[PipelineResult], Optional[str]]],
                        scaling_tolerance: float = 0.2) -> PipelineResult:
        """Aggregate per-point headlines into one table and the sweep-level checks."""
        summary = PipelineResult("sweep")
        names = sorted({key for point, _ in points if point is not None for key in point.headline})
        columns: Dict[str, List[float]] = {parameter: list(values), "failed": []}
        for name in names:
            columns[name] = []
        failures = []
        for value, (point, error) in zip(values, points):
            columns["failed"].append(0.0 if point is not None else 1.0)
            if point is None:
                failures.append({"value": value, "error": error})
            for name in names:
                columns[name].append(float(point.headline.get(name, np.nan)) if point is not None else np.nan)
        summary.add_table("sweep", {k: np.asarray(v, dtype=float) for k, v in columns.items()})
        summary.derived["failures"] = failures
        summary.derived["points"] = len(values)

        x = np.asarray(values, dtype=float)
        if "sigmadot" in columns:
            rates = np.asarray(columns["sigmadot"])
            if np.any(np.isfinite(rates)):
                summary.derived["sigmadot_peak"] = float(x[int(np.nanargmax(rates))])
        if "rc_deviation" in columns and parameter == "eta":
            order = np.argsort(x)[::-1]
            deviation = np.asarray(columns["rc_deviation"])[order]
            summary.add_check("rc_monotone", int(np.sum(np.diff(deviation) > 0)), 0)
        if parameter == "lambda" and "dissipative_heat_total" in columns:
            heat = np.abs(np.asarray(columns["dissipative_heat_total"]))
            usable = np.isfinite(heat) & (heat > 0)
            if np.count_nonzero(usable) >= 2:
                exponent = float(np.polyfit(np.log(x[usable]), np.log(heat[usable]), 1)[0])
                summary.derived["heat_exponent"] = exponent
                summary.add_check("heat_scaling", exponent - 2.0, scaling_tolerance, "within")
        return summary

"""
Configuration settings for the Fano-Anderson simulation engine
"""

from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class ToleranceProfile(BaseModel):
    """Numeric gates used by the solvers and by the pipeline checks."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Solver gates
    quadrature_epsabs: float = 1e-10
    quadrature_epsrel: float = 1e-10
    positivity: float = 1e-9
    decayed_green: float = 1e-6
    gamma_floor: float = 1e-9
    normalization: float = 1e-3

    # Check gates
    first_law: float = 1e-8
    heat_split: float = 1e-8
    work_vanishing: float = 1e-10
    entropy_production: float = 1e-9
    gibbs_residual: float = 1e-10
    gibbs_occupation: float = 1e-3
    steady_agreement: float = 1e-3
    markov_limit: float = 1e-8
    ness_convergence: float = 1e-3
    flux_balance: float = 1e-6
    ness_unitarity: float = 1e-8
    oracle_moments: float = 1e-4
    rc_relative: float = 5e-2
    force_identity: float = 1e-10
    force_forms: float = 1e-8
    ode_agreement: float = 1e-6
    witness: float = 1e-6
    scaling_exponent: float = 0.2
    convergence_order: float = 0.3

    def merged(self, overrides: Optional[Dict[str, float]]) -> "ToleranceProfile":
        """Copy with the given gates replaced."""
        if not overrides:
            return self
        unknown = set(overrides) - set(type(self).model_fields)
        if unknown:
            raise ValueError(f"Unknown tolerance names: {sorted(unknown)}")
        return self.model_copy(update=overrides)


TOLERANCE_PROFILES: Dict[str, ToleranceProfile] = {
    "default": ToleranceProfile(),
    "strict": ToleranceProfile(
        quadrature_epsabs=1e-12,
        quadrature_epsrel=1e-12,
        first_law=1e-10,
        heat_split=1e-9,
        gibbs_residual=1e-12,
        steady_agreement=1e-4,
        ness_convergence=1e-4,
        flux_balance=1e-8,
        oracle_moments=1e-5,
        ode_agreement=1e-7,
    ),
}


class SimulationSettings(BaseSettings):
    """Process-wide settings, read from FANO_* environment variables or .env."""

    model_config = SettingsConfigDict(env_prefix="FANO_", env_file=".env", env_file_encoding="utf-8",
                                      extra="ignore")

    # Output Configuration
    output_dir: str = Field(default="outputs")
    verbose: bool = Field(default=False)
    log_level: str = Field(default="INFO")

    # Execution
    workers: int = Field(default=1, ge=1)
    tolerance_profile: Literal["default", "strict"] = Field(default="default")

    def tolerances(self, profile: Optional[str] = None,
                   overrides: Optional[Dict[str, float]] = None) -> ToleranceProfile:
        """Resolve a named profile plus per-scenario overrides."""
        name = profile or self.tolerance_profile
        if name not in TOLERANCE_PROFILES:
            raise ValueError(f"Unknown tolerance profile {name!r}; choose from {sorted(TOLERANCE_PROFILES)}")
        return TOLERANCE_PROFILES[name].merged(overrides)


# Global settings instance
settings = SimulationSettings()

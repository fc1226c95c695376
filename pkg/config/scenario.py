"""
Scenario configuration schema and YAML loader
"""

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator

from physics import (
    ConstantDrive,
    DiscreteSpectralDensity,
    DisplacedMode,
    DrivingProtocol,
    EnvInitState,
    FlatSpectralDensity,
    FrequencyCutoff,
    GaussianModeState,
    GaussianPulse,
    LorentzianSpectralDensity,
    MonochromaticDrive,
    SampledDrive,
    SpectralDensity,
    SqueezedMode,
    TabulatedSpectralDensity,
    TimeGrid,
)

from .settings import ToleranceProfile, settings

PIPELINES = ("simulate", "steady", "ness", "rcmap", "oracle-check", "sweep")
SWEEP_PARAMETERS = ("eta", "gamma0", "detuning", "beta", "lambda", "omega_d", "alpha_d")


class ScenarioError(Exception):
    """Invalid scenario file; carries (line, column, location, message) diagnostics."""

    def __init__(self, message: str, diagnostics: Sequence[Tuple[Optional[int], Optional[int], str, str]] = ()):
        self.diagnostics = list(diagnostics)
        lines = [message] + [
            f"  line {line if line is not None else '?'}, column {column if column is not None else '?'}: "
            f"{location}: {text}"
            for line, column, location, text in self.diagnostics
        ]
        super().__init__("\n".join(lines))


def _as_pair(value: Any) -> Tuple[float, float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value), 0.0
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return float(value[0]), float(value[1])
    raise ValueError("expected a real number or a [re, im] pair")


def _as_beta(value: Any) -> float:
    if value is None:
        return float("inf")
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", ".inf", "infinity"):
        return float("inf")
    return value


ComplexPair = Annotated[Tuple[float, float], BeforeValidator(_as_pair)]
InverseTemperature = Annotated[float, BeforeValidator(_as_beta)]


def _complex(pair: Tuple[float, float]) -> complex:
    return complex(pair[0], pair[1])


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Spectral densities

class FlatDensityConfig(StrictModel):
    kind: Literal["flat"]
    gamma0: float = Field(gt=0)

    def build(self) -> SpectralDensity:
        return FlatSpectralDensity(self.gamma0)


class LorentzianDensityConfig(StrictModel):
    kind: Literal["lorentzian"]
    gamma0: float = Field(gt=0)
    eta: float = Field(gt=0)
    omega_c: float

    def build(self) -> SpectralDensity:
        return LorentzianSpectralDensity(self.gamma0, self.eta, self.omega_c)


class DiscreteModeConfig(StrictModel):
    omega: float = Field(gt=0)
    coupling: ComplexPair


class DiscreteDensityConfig(StrictModel):
    kind: Literal["discrete"]
    modes: List[DiscreteModeConfig] = Field(min_length=1)

    def build(self) -> SpectralDensity:
        return DiscreteSpectralDensity(
            frequencies=np.array([m.omega for m in self.modes]),
            couplings=np.array([_complex(m.coupling) for m in self.modes]),
        )


class TabulatedDensityConfig(StrictModel):
    kind: Literal["tabulated"]
    path: Optional[str] = None
    frequencies: Optional[List[float]] = None
    values: Optional[List[float]] = None
    order: Literal[1, 3] = 3

    @model_validator(mode="after")
    def _one_source(self):
        inline = self.frequencies is not None or self.values is not None
        if (self.path is None) == (not inline):
            raise ValueError("give either 'path' or inline 'frequencies' and 'values'")
        if inline and (self.frequencies is None or self.values is None):
            raise ValueError("inline tables need both 'frequencies' and 'values'")
        return self

    def build(self, base_dir: Optional[Path] = None) -> SpectralDensity:
        if self.path is not None:
            path = Path(self.path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return TabulatedSpectralDensity.from_csv(path, self.order)
        return TabulatedSpectralDensity(self.frequencies, self.values, self.order)


SpectralDensityConfig = Annotated[
    Union[FlatDensityConfig, LorentzianDensityConfig, DiscreteDensityConfig, TabulatedDensityConfig],
    Field(discriminator="kind"),
]


class CutoffConfig(StrictModel):
    omega_max: float = Field(default=20.0, gt=0)
    use_full_real_axis: bool = True
    omega_min: float = Field(default=1e-2, ge=0)

    def build(self) -> FrequencyCutoff:
        return FrequencyCutoff(self.omega_max, self.use_full_real_axis, self.omega_min)


class GridConfig(StrictModel):
    dt: float = Field(gt=0)
    steps: Optional[int] = Field(default=None, ge=2)
    duration: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _one_length(self):
        if (self.steps is None) == (self.duration is None):
            raise ValueError("give exactly one of 'steps' or 'duration'")
        return self

    def build(self) -> TimeGrid:
        if self.steps is not None:
            return TimeGrid(self.dt, self.steps)
        return TimeGrid.spanning(self.duration, self.dt)


# Environment

class DisplacedModeConfig(StrictModel):
    """One displaced bath mode; ``epsilon`` sets α = ε/λ for coupling-scaling studies."""

    omega: float
    coupling: ComplexPair
    alpha: Optional[ComplexPair] = None
    epsilon: Optional[ComplexPair] = None

    @model_validator(mode="after")
    def _one_amplitude(self):
        if (self.alpha is None) == (self.epsilon is None):
            raise ValueError("give exactly one of 'alpha' or 'epsilon'")
        return self

    def build(self, coupling_scale: float) -> DisplacedMode:
        alpha = _complex(self.alpha) if self.alpha is not None else _complex(self.epsilon) / coupling_scale
        return DisplacedMode(self.omega, coupling_scale * _complex(self.coupling), alpha)


class SqueezedModeConfig(StrictModel):
    omega: float
    coupling: ComplexPair
    pair: ComplexPair
    occupation: Optional[float] = Field(default=None, ge=0)

    def build(self, coupling_scale: float) -> SqueezedMode:
        return SqueezedMode(self.omega, coupling_scale * _complex(self.coupling), _complex(self.pair), self.occupation)


class EnvironmentConfig(StrictModel):
    beta: InverseTemperature = float("inf")
    displaced: List[DisplacedModeConfig] = Field(default_factory=list)
    squeezed: List[SqueezedModeConfig] = Field(default_factory=list)

    @field_validator("beta")
    @classmethod
    def _positive_beta(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("beta must be positive (use inf or null for zero temperature)")
        return value

    def build(self, coupling_scale: float = 1.0) -> EnvInitState:
        return EnvInitState(
            beta=self.beta,
            displaced=tuple(m.build(coupling_scale) for m in self.displaced),
            squeezed=tuple(m.build(coupling_scale) for m in self.squeezed),
        )


# Initial system state

class VacuumStateConfig(StrictModel):
    kind: Literal["vacuum"]

    def build(self) -> GaussianModeState:
        return GaussianModeState.vacuum()


class CoherentStateConfig(StrictModel):
    kind: Literal["coherent"]
    alpha: ComplexPair

    def build(self) -> GaussianModeState:
        return GaussianModeState.coherent(_complex(self.alpha))


class ThermalStateConfig(StrictModel):
    kind: Literal["thermal"]
    occupation: float = Field(ge=0)

    def build(self) -> GaussianModeState:
        return GaussianModeState.thermal(self.occupation)


class CustomStateConfig(StrictModel):
    kind: Literal["custom"]
    mean: ComplexPair = (0.0, 0.0)
    pair: ComplexPair = (0.0, 0.0)
    occupation: float = Field(ge=0)

    def build(self) -> GaussianModeState:
        state = GaussianModeState(_complex(self.mean), _complex(self.pair), self.occupation)
        state.check_positivity()
        return state


InitialStateConfig = Annotated[
    Union[VacuumStateConfig, CoherentStateConfig, ThermalStateConfig, CustomStateConfig],
    Field(discriminator="kind"),
]


# Driving

class ConstantDriveConfig(StrictModel):
    kind: Literal["constant"]
    amplitude: ComplexPair

    def build(self, base_dir: Optional[Path] = None) -> DrivingProtocol:
        return ConstantDrive(_complex(self.amplitude))


class MonochromaticDriveConfig(StrictModel):
    kind: Literal["monochromatic"]
    amplitude: ComplexPair
    frequency: float

    def build(self, base_dir: Optional[Path] = None) -> DrivingProtocol:
        return MonochromaticDrive(_complex(self.amplitude), self.frequency)


class GaussianPulseConfig(StrictModel):
    kind: Literal["gaussian_pulse"]
    amplitude: ComplexPair
    center: float
    width: float = Field(gt=0)
    frequency: float = 0.0

    def build(self, base_dir: Optional[Path] = None) -> DrivingProtocol:
        return GaussianPulse(_complex(self.amplitude), self.center, self.width, self.frequency)


class SampledDriveConfig(StrictModel):
    kind: Literal["sampled"]
    path: Optional[str] = None
    times: Optional[List[float]] = None
    values: Optional[List[ComplexPair]] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.path is None) == (self.times is None or self.values is None):
            raise ValueError("give either 'path' or inline 'times' and 'values'")
        return self

    def build(self, base_dir: Optional[Path] = None) -> DrivingProtocol:
        if self.path is not None:
            path = Path(self.path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return SampledDrive.from_csv(path)
        return SampledDrive(np.array(self.times), np.array([_complex(v) for v in self.values]))


DriveConfig = Annotated[
    Union[ConstantDriveConfig, MonochromaticDriveConfig, GaussianPulseConfig, SampledDriveConfig],
    Field(discriminator="kind"),
]


# Pipeline sections

class SolverConfig(StrictModel):
    green_method: Literal["auto", "volterra", "closed"] = "auto"
    propagation: Literal["closed_form", "ode"] = "closed_form"
    cross_check: bool = True
    substeps: int = Field(default=1, ge=1)
    panel_width: float = Field(default=0.05, gt=0)
    convergence_check: bool = True
    random_states: int = Field(default=20, ge=0)
    seed: int = 0


class OracleConfig(StrictModel):
    n_modes: int = Field(default=2000, ge=2)
    omega_max: Optional[float] = Field(default=None, gt=0)
    use_full_real_axis: Optional[bool] = None


class FrequencyRange(StrictModel):
    start: float
    stop: float
    num: int = Field(ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.stop > self.start:
            raise ValueError("'stop' must exceed 'start'")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class NessConfig(StrictModel):
    resonance: Optional[FrequencyRange] = None


class RcConfig(StrictModel):
    etas: List[float] = Field(default_factory=list)


class SecondOrderConfig(StrictModel):
    lambdas: List[float] = Field(min_length=2)


class SemiclassicalModeConfig(StrictModel):
    omega: float
    coupling: float
    phase: float = 0.0


class SemiclassicalConfig(StrictModel):
    epsilon: float = Field(gt=0)
    lambdas: List[float] = Field(min_length=2)
    modes: List[SemiclassicalModeConfig] = Field(min_length=1)


class SweepConfig(StrictModel):
    pipeline: Literal["simulate", "steady", "ness", "rcmap", "oracle-check"] = "simulate"
    parameter: Optional[Literal["eta", "gamma0", "detuning", "beta", "lambda", "omega_d", "alpha_d"]] = None
    values: List[float] = Field(default_factory=list)


class ScenarioConfig(StrictModel):
    """Top-level scenario file."""

    name: str = "scenario"
    pipeline: Literal["simulate", "steady", "ness", "rcmap", "oracle-check", "sweep"] = "simulate"
    omega0: float = 1.0
    coupling_scale: float = Field(default=1.0, gt=0)
    spectral_density: SpectralDensityConfig
    cutoff: CutoffConfig = Field(default_factory=CutoffConfig)
    grid: GridConfig
    environment: EnvironmentConfig = Field(default_factory=EnvironmentConfig)
    initial_state: InitialStateConfig = Field(default_factory=lambda: VacuumStateConfig(kind="vacuum"))
    drive: Optional[DriveConfig] = None
    solver: SolverConfig = Field(default_factory=SolverConfig)
    oracle: Optional[OracleConfig] = None
    ness: NessConfig = Field(default_factory=NessConfig)
    rcmap: RcConfig = Field(default_factory=RcConfig)
    second_order: Optional[SecondOrderConfig] = None
    semiclassical: Optional[SemiclassicalConfig] = None
    expect_witness: bool = False
    sweep: Optional[SweepConfig] = None
    output_dir: Optional[str] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def _known_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        unknown = set(value) - set(ToleranceProfile.model_fields)
        if unknown:
            raise ValueError(f"unknown tolerance names {sorted(unknown)}")
        return value

    def build(self, base_dir: Optional[Path] = None, profile: Optional[str] = None) -> "Scenario":
        """Turn the validated file into numeric domain objects."""
        spectral = self.spectral_density
        J = spectral.build(base_dir) if isinstance(spectral, TabulatedDensityConfig) else spectral.build()
        if self.coupling_scale != 1.0:
            J = J.scaled(self.coupling_scale)

        cutoff = self.cutoff.build()
        oracle_cutoff = None
        if self.oracle is not None:
            oracle_cutoff = FrequencyCutoff(
                self.oracle.omega_max if self.oracle.omega_max is not None else cutoff.omega_max,
                cutoff.use_full_real_axis if self.oracle.use_full_real_axis is None else self.oracle.use_full_real_axis,
                cutoff.omega_min,
            )

        return Scenario(
            config=self,
            spectral_density=J,
            omega0=self.omega0,
            grid=self.grid.build(),
            cutoff=cutoff,
            environment=self.environment.build(self.coupling_scale),
            initial_state=self.initial_state.build(),
            drive=self.drive.build(base_dir) if self.drive is not None else None,
            oracle_cutoff=oracle_cutoff,
            tolerances=settings.tolerances(profile, self.tolerances),
        )

    def with_parameter(self, parameter: str, value: float) -> "ScenarioConfig":
        """Copy of the scenario with one sweep parameter replaced."""
        data = copy.deepcopy(self.model_dump(mode="python"))
        density = data["spectral_density"]
        displaced = data["environment"]["displaced"]

        if parameter in ("eta", "gamma0"):
            if parameter not in density:
                raise ValueError(f"Parameter {parameter!r} does not apply to a {density['kind']} density")
            density[parameter] = value
        elif parameter == "detuning":
            if density["kind"] != "lorentzian":
                raise ValueError("Detuning sweeps need a Lorentzian density")
            density["omega_c"] = data["omega0"] - value
        elif parameter == "beta":
            data["environment"]["beta"] = value
        elif parameter == "lambda":
            data["coupling_scale"] = value
        elif parameter in ("omega_d", "alpha_d"):
            if not displaced:
                raise ValueError(f"Parameter {parameter!r} needs a displaced environment mode")
            if parameter == "omega_d":
                displaced[0]["omega"] = value
            else:
                displaced[0]["alpha"] = (value, 0.0)
                displaced[0]["epsilon"] = None
        else:
            raise ValueError(f"Unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
        return ScenarioConfig.model_validate(data)


@dataclass
class Scenario:
    """Numeric objects built from a ScenarioConfig."""

    config: ScenarioConfig
    spectral_density: SpectralDensity
    omega0: float
    grid: TimeGrid
    cutoff: FrequencyCutoff
    environment: EnvInitState
    initial_state: GaussianModeState
    drive: Optional[DrivingProtocol]
    oracle_cutoff: Optional[FrequencyCutoff]
    tolerances: ToleranceProfile = field(default_factory=ToleranceProfile)


def _locate(root: Optional[yaml.Node], location: Sequence[Union[str, int]]) -> Tuple[Optional[int], Optional[int]]:
    """Walk the composed YAML tree along a validation error location."""
    if root is None:
        return None, None
    node = root
    for key in location:
        if isinstance(node, yaml.MappingNode):
            match = next((value for name, value in node.value if name.value == key), None)
            if match is None:
                # union tags and missing keys do not appear in the file
                continue
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
    return node.start_mark.line + 1, node.start_mark.column + 1


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Validate YAML text against the scenario schema."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise ScenarioError(f"{source}: YAML syntax error", [(line, column, "", str(getattr(e, "problem", e)))])

    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be a mapping", [(1, 1, "", "expected key: value pairs")])

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        diagnostics = []
        for error in e.errors():
            line, column = _locate(root, error["loc"])
            location = ".".join(str(part) for part in error["loc"])
            diagnostics.append((line, column, location, error["msg"]))
        raise ScenarioError(f"{source}: scenario does not match the schema", diagnostics)


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"Scenario file not found: {path}")
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))

"""
Config package initialization
"""

from .scenario import (
    PIPELINES,
    SWEEP_PARAMETERS,
    Scenario,
    ScenarioConfig,
    ScenarioError,
    load_scenario,
    parse_scenario,
)
from .settings import TOLERANCE_PROFILES, SimulationSettings, ToleranceProfile, settings

__all__ = [
    'SimulationSettings', 'ToleranceProfile', 'TOLERANCE_PROFILES', 'settings',
    'ScenarioConfig', 'Scenario', 'ScenarioError', 'load_scenario', 'parse_scenario',
    'PIPELINES', 'SWEEP_PARAMETERS',
]

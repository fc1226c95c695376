"""
Pipelines package initialization
"""

from .scenario_pipelines import PipelineResult, ScenarioPipelines

__all__ = ['ScenarioPipelines', 'PipelineResult']

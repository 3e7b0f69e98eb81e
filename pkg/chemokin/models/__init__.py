"""Pydantic models for chemokin."""

from .experiment import (
    AgentNumerics,
    ClosureNumerics,
    EnvironmentConfig,
    ExperimentConfig,
    KineticNumerics,
    MacroNumerics,
    NumericsConfig,
    OutputConfig,
    Tier,
)
from .params import Environment, PhysParams, Regime
from .results import ResultTable, RunReport, read_table

__all__ = [
    # Parameters
    "PhysParams",
    "Environment",
    "Regime",
    # Experiment
    "ExperimentConfig",
    "EnvironmentConfig",
    "NumericsConfig",
    "ClosureNumerics",
    "AgentNumerics",
    "KineticNumerics",
    "MacroNumerics",
    "OutputConfig",
    "Tier",
    # Results
    "ResultTable",
    "RunReport",
    "read_table",
]

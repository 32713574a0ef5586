from src.config.settings import settings
from src.config.schemas import (
    ExperimentConfig,
    InitMode,
    Method,
    SolverConfig,
    StopOn,
    build_experiment_config,
    build_solver_config,
)

__all__ = [
    "settings",
    "ExperimentConfig", "InitMode", "Method", "SolverConfig", "StopOn",
    "build_experiment_config", "build_solver_config",
]

"""平滑 minimax 目标与投影梯度求解器。"""

from src.optim.line_search import BacktrackingLineSearch, StepResult
from src.optim.objective import (
    DecisionPoint,
    SmoothedObjective,
    exact_objective,
    gradient,
    least_squares_gain,
    smooth_objective,
)
from src.optim.report import IterationRecord, SolverReport, StopReason
from src.optim.solver import (
    ImprovementWindow,
    as_channel,
    backtracking_stepsize,
    initial_point,
    next_beta,
    pg_step,
    project,
    project_point,
    solve,
    solve_fpg,
    solve_pg,
)

__all__ = [
    "BacktrackingLineSearch",
    "StepResult",
    "DecisionPoint",
    "SmoothedObjective",
    "exact_objective",
    "gradient",
    "least_squares_gain",
    "smooth_objective",
    "IterationRecord",
    "SolverReport",
    "StopReason",
    "ImprovementWindow",
    "as_channel",
    "backtracking_stepsize",
    "initial_point",
    "next_beta",
    "pg_step",
    "project",
    "project_point",
    "solve",
    "solve_fpg",
    "solve_pg",
]

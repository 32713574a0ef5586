"""投影梯度的回溯线搜索。

候选步长 γ = γ_init·η^k（k = 0 … max_backtracks），ẑ = Π(w − γ∇f(w))，
接受第一个满足二次上界条件的步长：
    f(ẑ) ≤ f(w) + ⟨∇f(w), ẑ − w⟩ + (1/2 − c)·‖ẑ − w‖²/γ
w 为 PG 的当前点或 FPG 的外推点。w 可行时，由投影的最近点性质
⟨∇f(w), ẑ − w⟩ ≤ −‖ẑ − w‖²/(2γ)，上式蕴含充分下降 f(ẑ) ≤ f(w) − (c/γ)·‖ẑ − w‖²。
被接受的步长翻倍后作为下一次搜索的 γ_init，使步长能够回升。
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.config.schemas import SolverConfig
from src.optim.objective import DecisionPoint, DifferentiableObjective

Projection = Callable[[float, np.ndarray], DecisionPoint]


@dataclass(frozen=True)
class StepResult:
    """一次线搜索的结果。

    failed=True 表示 max_backtracks 次收缩后仍不满足条件，
    此时返回最小的尝试步长及其投影点。
    """

    point: DecisionPoint
    value: float
    gamma: float
    backtracks: int
    failed: bool = False


def model_gap(
    base: DecisionPoint,
    point: DecisionPoint,
    grad_d: float,
    grad_X: np.ndarray,
    gamma: float,
    c: float,
) -> float:
    """⟨∇f(base), point − base⟩ + (1/2 − c)·‖point − base‖²/γ。"""
    linear = grad_d * (point.d - base.d) + float(np.sum(grad_X * (point.Xbar - base.Xbar)))
    return linear + (0.5 - c) * point.sq_distance(base) / gamma


class BacktrackingLineSearch:
    """带步长记忆的回溯线搜索，每个求解过程持有一个实例。"""

    def __init__(self, cfg: SolverConfig):
        self._shrink = cfg.shrink
        self._c = cfg.sufficient_decrease
        self._max_backtracks = cfg.max_backtracks
        self._gamma_init = cfg.initial_step

    @property
    def initial_step(self) -> float:
        """下一次搜索的起始步长。"""
        return self._gamma_init

    def search(
        self,
        obj: DifferentiableObjective,
        base: DecisionPoint,
        f_base: float,
        grad_d: float,
        grad_X: np.ndarray,
        project: Projection,
    ) -> StepResult:
        gamma = self._gamma_init
        point, value = None, np.inf
        for k in range(self._max_backtracks + 1):
            point = project(base.d - gamma * grad_d, base.Xbar - gamma * grad_X)
            value = obj.value(point)
            if value <= f_base + model_gap(base, point, grad_d, grad_X, gamma, self._c):
                self._gamma_init = 2.0 * gamma
                return StepResult(point=point, value=value, gamma=gamma, backtracks=k)
            if k < self._max_backtracks:
                gamma *= self._shrink

        self._gamma_init = 2.0 * gamma
        return StepResult(
            point=point, value=value, gamma=gamma,
            backtracks=self._max_backtracks, failed=True,
        )

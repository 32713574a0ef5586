"""求解器运行报告。

SolverReport 在迭代过程中逐步填充（迭代轨迹、回溯次数），结束后给出最终点、
停止原因与耗时，可打印摘要或导出逐迭代 CSV。
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.optim.objective import DecisionPoint
from src.utils.files import atomic_write_csv, format_float

TRACE_HEADER = ("iter", "f_smooth", "f_exact", "gamma", "backtracks")


class StopReason(str, Enum):
    """迭代停止原因。"""

    TOLERANCE = "tolerance"
    MAX_ITERS = "max-iters"


@dataclass
class IterationRecord:
    """单次迭代的记录。"""
    iteration: int
    f_smooth: float
    f_exact: float
    gamma: float
    backtracks: int
    line_search_failed: bool = False


@dataclass
class SolverReport:
    """一次 PG / FPG / MUImin 求解的结果与过程指标。"""

    method: str
    point: Optional[DecisionPoint] = None
    P: float = 1.0
    iterations: int = 0
    stop_reason: StopReason = StopReason.MAX_ITERS

    # 迭代轨迹（按 trace_every 稀疏化，首末迭代总是保留）
    trace: List[IterationRecord] = field(default_factory=list)
    total_backtracks: int = 0
    line_search_failures: int = 0
    restarts: int = 0
    sigma_final: float = 0.0

    start_time: float = field(default_factory=time.perf_counter)
    end_time: float = 0.0

    @property
    def d(self) -> float:
        return self.point.d if self.point is not None else 0.0

    @property
    def Xbar(self) -> np.ndarray:
        if self.point is None:
            raise ValueError("求解尚未产生结果")
        return self.point.Xbar

    @property
    def wall_seconds(self) -> float:
        end = self.end_time or time.perf_counter()
        return end - self.start_time

    @property
    def final_smooth(self) -> float:
        return self.trace[-1].f_smooth if self.trace else float("nan")

    @property
    def final_exact(self) -> float:
        return self.trace[-1].f_exact if self.trace else float("nan")

    @property
    def initial_exact(self) -> float:
        return self.trace[0].f_exact if self.trace else float("nan")

    def record(self, entry: IterationRecord, keep: bool = True) -> None:
        """累计回溯计数；keep=False 时不写入轨迹（稀疏化）。"""
        self.total_backtracks += entry.backtracks
        if entry.line_search_failed:
            self.line_search_failures += 1
        if keep:
            self.trace.append(entry)

    def finish(self, point: DecisionPoint, iterations: int, stop_reason: StopReason,
               last: Optional[IterationRecord] = None) -> None:
        self.point = point
        self.iterations = iterations
        self.stop_reason = stop_reason
        if last is not None and (not self.trace or self.trace[-1] is not last):
            self.trace.append(last)
        self.end_time = time.perf_counter()

    def smooth_trace(self) -> np.ndarray:
        return np.array([r.f_smooth for r in self.trace])

    def exact_trace(self) -> np.ndarray:
        return np.array([r.f_exact for r in self.trace])

    def write_trace_csv(self, path: Path) -> Path:
        """导出逐迭代轨迹：iter,f_smooth,f_exact,gamma,backtracks。"""
        rows = (
            (str(r.iteration), format_float(r.f_smooth), format_float(r.f_exact),
             format_float(r.gamma), str(r.backtracks))
            for r in self.trace
        )
        return atomic_write_csv(path, TRACE_HEADER, rows)

    def summary(self) -> str:
        """生成可读的求解摘要。"""
        parts = [
            f"方法: {self.method}",
            f"迭代: {self.iterations} ({self.stop_reason.value})",
            f"耗时: {self.wall_seconds * 1000:.1f}ms",
            f"d={self.d:.6g}",
            f"精确目标: {self.final_exact:.6g}",
            f"平滑目标: {self.final_smooth:.6g}",
            f"回溯: {self.total_backtracks}次",
        ]
        if self.line_search_failures:
            parts.append(f"线搜索失败: {self.line_search_failures}次")
        if self.restarts:
            parts.append(f"重启: {self.restarts}次")
        return " | ".join(parts)

"""对比基线预编码：ZF（无恒包络约束）、CE-ZF（ZF 朴素投影）与 MUI 总功率最小化。

- ZF 逐时隙归一化到 ‖x_t‖² = P，接收端使用逐时隙增益 d_t = c_t
- CE-ZF 把每个 ZF 天线样本缩放到 √(P/N)（保留相位），再对整块做最小二乘增益重拟合
- MUImin 在 CE 集合上交替：固定 d 对 g(X̄) = ‖H̄X̄ − d·S̄‖² 做一步投影梯度，再闭式更新 d
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.config.schemas import InitMode, SolverConfig
from src.errors import DomainError, RankDeficientChannelError
from src.observability.instruments import record_solver_metrics
from src.optim.line_search import BacktrackingLineSearch
from src.optim.objective import DecisionPoint, SmoothedObjective, least_squares_gain
from src.optim.report import IterationRecord, SolverReport, StopReason
from src.optim.solver import ChannelLike, ImprovementWindow, as_channel, initial_point, project
from src.phy.channel import Channel, lift, stack_real, unstack_real
from src.utils.logger import logger


@dataclass(frozen=True)
class PrecodeResult:
    """一个块的预编码结果。

    Attributes:
        method: 方法标识（zf / ce-zf / mui-min / pg / fpg）。
        Xbar: 2N×T 实堆叠发射矩阵；恒包络方法满足 CE 约束。
        gains: 每个时隙的接收判决增益 (T,)；共享增益方法各元素相等。
        constant_envelope: 是否为恒包络方法。
        report: 迭代类方法的求解报告。
    """

    method: str
    Xbar: np.ndarray
    gains: np.ndarray
    constant_envelope: bool = True
    report: Optional[SolverReport] = field(default=None, repr=False)

    @property
    def X(self) -> np.ndarray:
        """复发射矩阵 N×T。"""
        return unstack_real(self.Xbar)

    @property
    def d(self) -> float:
        """块共享增益；ZF 没有共享增益，返回各时隙增益的最小值。"""
        return float(np.min(self.gains))

    @property
    def per_slot_gain(self) -> bool:
        return not self.constant_envelope

    @property
    def iterations(self) -> int:
        return self.report.iterations if self.report is not None else 0

    def exact_objective(self, obj: SmoothedObjective) -> float:
        """max_{i,t}(|h̄_iᵀx̄_t − d_t·s̄_{i,t}| − d_t)，共享增益时即精确 minimax 目标。"""
        return obj.exact_with_gains(self.Xbar, self.gains)


def _as_symbols(S: np.ndarray, K: int) -> np.ndarray:
    S = np.asarray(S)
    if S.ndim == 1:
        S = S[:, None]
    if S.shape[0] != K:
        raise DomainError(f"符号矩阵行数 {S.shape[0]} 与用户数 K={K} 不符")
    return S.astype(np.complex128)


def _zf_directions(channel: Channel, S: np.ndarray) -> np.ndarray:
    """未归一化的 ZF 发射矩阵 Hᴴ(HHᴴ)⁻¹S。"""
    H = channel.H
    if channel.N < channel.K or np.linalg.matrix_rank(H) < channel.K:
        raise RankDeficientChannelError(
            f"ZF 要求信道行满秩，当前 K={channel.K}, N={channel.N}, "
            f"rank={np.linalg.matrix_rank(H)}"
        )
    gram = H @ H.conj().T
    try:
        return H.conj().T @ np.linalg.solve(gram, S)
    except np.linalg.LinAlgError as e:
        raise RankDeficientChannelError(f"HHᴴ 奇异，无法计算 ZF: {e}") from e


def zf_precode(H: ChannelLike, S: np.ndarray, P: float) -> PrecodeResult:
    """x_t = c_t·Hᴴ(HHᴴ)⁻¹s_t，c_t = √P/‖Hᴴ(HHᴴ)⁻¹s_t‖。

    ZF 无干扰：Hx_t = c_t·s_t，因此接收增益取 d_t = c_t。

    Raises:
        RankDeficientChannelError: N < K 或 H 非行满秩。
    """
    channel = as_channel(H)
    S = _as_symbols(S, channel.K)
    directions = _zf_directions(channel, S)
    norms = np.linalg.norm(directions, axis=0)
    gains = np.sqrt(P) / norms
    X = directions * gains
    return PrecodeResult(method="zf", Xbar=stack_real(X), gains=gains, constant_envelope=False)


def ce_zf_precode(H: ChannelLike, S: np.ndarray, P: float) -> PrecodeResult:
    """ZF 朴素投影到 CE 集合，d = max{0, Re(Σ_t s_tᴴHx_t) / Σ_t‖s_t‖²}。

    零样本沿用求解器投影的相位 0 约定。
    """
    channel = as_channel(H)
    S = _as_symbols(S, channel.K)
    directions = _zf_directions(channel, S)
    Xbar = project(0.0, stack_real(directions), P).Xbar
    d = least_squares_gain(lift(channel).Hbar, Xbar, stack_real(S))
    return PrecodeResult(method="ce-zf", Xbar=Xbar, gains=np.full(S.shape[1], d))


class MuiObjective:
    """g(z) = ‖H̄X̄ − d·S̄‖²，对 d 的梯度置 0（d 在 X 步中固定）。"""

    def __init__(self, Hbar: np.ndarray, Sbar: np.ndarray):
        self._Hbar = Hbar
        self._Sbar = Sbar

    def residual(self, z: DecisionPoint) -> np.ndarray:
        return self._Hbar @ z.Xbar - z.d * self._Sbar

    def value(self, z: DecisionPoint) -> float:
        r = self.residual(z)
        return float(np.vdot(r, r).real)

    def value_and_gradient(self, z: DecisionPoint) -> Tuple[float, float, np.ndarray]:
        r = self.residual(z)
        return float(np.vdot(r, r).real), 0.0, 2.0 * self._Hbar.T @ r

    def gradient_X(self, z: DecisionPoint) -> np.ndarray:
        return 2.0 * self._Hbar.T @ self.residual(z)


def _mui_start(channel: Channel, S: np.ndarray, Sbar: np.ndarray, P: float,
               cfg: SolverConfig) -> DecisionPoint:
    """N ≥ K 时以 CE-ZF 为起点，否则（或秩亏时）随机相位起点。"""
    if channel.N >= channel.K:
        try:
            warm = ce_zf_precode(channel, S, P)
            return DecisionPoint(d=warm.d, Xbar=warm.Xbar)
        except RankDeficientChannelError:
            logger.debug("MUImin 起点回退到随机相位 | K={} | N={}", channel.K, channel.N)
    return initial_point(channel, Sbar, P, cfg.model_copy(update={"init": InitMode.RANDOM_PHASE}))


def mui_min_precode(
    H: ChannelLike,
    S: np.ndarray,
    P: float,
    cfg: Optional[SolverConfig] = None,
) -> PrecodeResult:
    """MUI 总功率最小化恒包络预编码（交替投影梯度 + 闭式增益更新）。

    停止准则与求解器一致（平均改进量窗口），监控量取 g/P：
    g 随 P 线性缩放，归一化后迭代过程与 P 无关，X̄ 与 d 随 √P 缩放。
    """
    cfg = cfg or SolverConfig()
    channel = as_channel(H)
    S = _as_symbols(S, channel.K)
    Hbar, Sbar = lift(channel).Hbar, stack_real(S)
    mui = MuiObjective(Hbar, Sbar)
    minimax = SmoothedObjective(Hbar, Sbar, cfg.sigma)
    search = BacktrackingLineSearch(cfg)
    report = SolverReport(method="mui-min", P=P)

    def proj(d: float, X: np.ndarray) -> DecisionPoint:
        return project(d, X, P)

    z = _mui_start(channel, S, Sbar, P, cfg)
    g = mui.value(z)
    window = ImprovementWindow(cfg.tol, cfg.stop_window)
    window.reset(g / P)
    record = IterationRecord(0, g, minimax.exact(z), 0.0, 0)
    report.record(record)
    stop, iteration = StopReason.MAX_ITERS, 0

    for iteration in range(1, cfg.max_iters + 1):
        g_z, grad_d, grad_X = mui.value_and_gradient(z)
        step = search.search(mui, z, g_z, grad_d, grad_X, proj)
        Xbar = z.Xbar if step.failed and step.value > g_z else step.point.Xbar
        z = DecisionPoint(d=least_squares_gain(Hbar, Xbar, Sbar), Xbar=Xbar)
        g_new = mui.value(z)

        record = IterationRecord(
            iteration, g_new, minimax.exact(z), step.gamma, step.backtracks, step.failed,
        )
        report.record(record, keep=iteration % cfg.trace_every == 0)
        if window.update(g_new / P):
            stop = StopReason.TOLERANCE
            break

    report.sigma_final = cfg.sigma
    report.finish(z, iteration, stop, last=record)
    record_solver_metrics(
        method="mui-min",
        iterations=report.iterations,
        duration_ms=report.wall_seconds * 1000,
        stop_reason=stop.value,
    )
    logger.debug("MUImin 完成 | {}", report.summary())
    return PrecodeResult(
        method="mui-min", Xbar=z.Xbar, gains=np.full(S.shape[1], z.d), report=report,
    )


def solver_result(report: SolverReport) -> PrecodeResult:
    """SolverReport → PrecodeResult。"""
    T = report.Xbar.shape[1]
    return PrecodeResult(
        method=report.method, Xbar=report.Xbar, gains=np.full(T, report.d), report=report,
    )


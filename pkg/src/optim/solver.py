"""恒包络集合上的投影梯度求解器：PG 与 FISTA 加速的 FPG。

可行集 𝒟 = {d ≥ 0} × {每个时隙每根天线 |x_j|² = P/N}，其投影为闭式：
d 截断到非负，每对 (x̄_j, x̄_{j+N}) 缩放到半径 √(P/N)。
两种求解器共享同一迭代循环，区别仅在于梯度与投影作用在 z 还是外推点 w 上。
"""

import math
from collections import deque
from typing import Deque, Optional, Union

import numpy as np

from src.config.schemas import InitMode, SolverConfig, StopOn
from src.observability import get_tracer
from src.observability.instruments import record_solver_metrics, trace_span
from src.optim.line_search import BacktrackingLineSearch, StepResult
from src.optim.objective import DecisionPoint, SmoothedObjective, least_squares_gain
from src.optim.report import IterationRecord, SolverReport, StopReason
from src.phy.channel import Channel, RealChannel, lift, unstack_real
from src.errors import DomainError
from src.utils.logger import logger

_tracer = get_tracer(__name__)

ChannelLike = Union[Channel, RealChannel, np.ndarray]


# ── 停止准则 ──


class ImprovementWindow:
    """平均改进量停止准则。

    保留最近 window+1 个监控值；最近 m = min(l, window) 次迭代的平均改进
    |v_{l-m} − v_l| / m 小于 tol 时判定收敛。window=1 即相邻两次迭代之差。
    """

    def __init__(self, tol: float, window: int):
        self._tol = tol
        self._values: Deque[float] = deque(maxlen=window + 1)

    def reset(self, value: float) -> None:
        self._values.clear()
        self._values.append(value)

    def update(self, value: float) -> bool:
        self._values.append(value)
        span = len(self._values) - 1
        return abs(self._values[0] - self._values[-1]) < self._tol * span


# ── 投影 ──


def project(d_tilde: float, X_tilde: np.ndarray, P: float) -> DecisionPoint:
    """欧氏投影到 𝒟。

    r_j = 0 的退化对投影不唯一，统一取相位 0，即 (√(P/N), 0)。
    """
    X_tilde = np.asarray(X_tilde, dtype=float)
    N = X_tilde.shape[0] // 2
    amplitude = math.sqrt(P / N)
    re, im = X_tilde[:N], X_tilde[N:]
    r = np.hypot(re, im)
    degenerate = r == 0.0
    safe_r = np.where(degenerate, 1.0, r)
    Xbar = np.concatenate([
        np.where(degenerate, amplitude, amplitude * re / safe_r),
        np.where(degenerate, 0.0, amplitude * im / safe_r),
    ])
    return DecisionPoint(d=max(0.0, float(d_tilde)), Xbar=Xbar)


def project_point(z: DecisionPoint, P: float) -> DecisionPoint:
    return project(z.d, z.Xbar, P)


def infer_power(Xbar: np.ndarray) -> float:
    """从恒包络点反推总功率 P = N·|x_1|²。"""
    N = Xbar.shape[0] // 2
    return float(N * (Xbar[0, 0] ** 2 + Xbar[N, 0] ** 2))


# ── 单步与线搜索 ──


def pg_step(z: DecisionPoint, gamma: float, obj: SmoothedObjective,
            P: Optional[float] = None) -> DecisionPoint:
    """z⁺ = Π(z − γ∇f(z))。"""
    if not gamma > 0:
        raise DomainError(f"步长 γ 必须为正，当前 γ={gamma}")
    P = infer_power(z.Xbar) if P is None else P
    grad_d, grad_X = obj.gradient(z)
    return project(z.d - gamma * grad_d, z.Xbar - gamma * grad_X, P)


def backtracking_stepsize(z: DecisionPoint, obj: SmoothedObjective, cfg: SolverConfig,
                          P: Optional[float] = None) -> float:
    """从 cfg.initial_step 开始回溯一次，返回被接受（或最小尝试）的步长。"""
    return _backtrack(z, obj, cfg, P).gamma


def _backtrack(z: DecisionPoint, obj: SmoothedObjective, cfg: SolverConfig,
               P: Optional[float] = None) -> StepResult:
    P = infer_power(z.Xbar) if P is None else P
    f_z, grad_d, grad_X = obj.value_and_gradient(z)
    search = BacktrackingLineSearch(cfg)
    return search.search(obj, z, f_z, grad_d, grad_X, lambda d, X: project(d, X, P))


def next_beta(beta: float) -> float:
    """β_{l+1} = (1 + √(1 + 4β_l²)) / 2。"""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * beta * beta))


# ── 初始化 ──


def as_channel(H: ChannelLike) -> Channel:
    """Channel / RealChannel / K×N 数组 → Channel。

    实等效形式只通过 RealChannel 识别；裸数组（实数或复数）一律视为 K×N 复信道。
    """
    if isinstance(H, Channel):
        return H
    if isinstance(H, RealChannel):
        K, N = H.K, H.N
        return Channel(H=H.Hbar[:K, :N] + 1j * H.Hbar[K:, :N])
    return Channel(H=np.asarray(H, dtype=complex))


def initial_point(channel: Channel, Sbar: np.ndarray, P: float, cfg: SolverConfig) -> DecisionPoint:
    """构造初始可行点。

    random-phase: 各天线相位在 [0, 2π) 上均匀，d⁰ 取闭式最小二乘解；
    ce-zf: 以 CE-ZF 基线为热启动。
    """
    real = lift(channel)
    T = Sbar.shape[1]
    if cfg.init == InitMode.CE_ZF:
        from src.precoders.baselines import ce_zf_precode

        warm = ce_zf_precode(channel, unstack_real(Sbar), P)
        return DecisionPoint(d=warm.d, Xbar=warm.Xbar)

    rng = np.random.default_rng(cfg.seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(channel.N, T))
    amplitude = math.sqrt(P / channel.N)
    Xbar = amplitude * np.concatenate([np.cos(phases), np.sin(phases)])
    return DecisionPoint(d=least_squares_gain(real.Hbar, Xbar, Sbar), Xbar=Xbar)


# ── 求解 ──


def solve_pg(H: ChannelLike, Sbar: np.ndarray, P: float, cfg: SolverConfig) -> SolverReport:
    """投影梯度（单调，回溯线搜索）。"""
    return _solve(H, Sbar, P, cfg, accelerate=False)


def solve_fpg(H: ChannelLike, Sbar: np.ndarray, P: float, cfg: SolverConfig) -> SolverReport:
    """FISTA 外推的投影梯度，β₀ = 1，z⁻¹ = z⁰。"""
    return _solve(H, Sbar, P, cfg, accelerate=True)


def solve(H: ChannelLike, Sbar: np.ndarray, P: float, cfg: SolverConfig) -> SolverReport:
    """按 cfg.accelerate 选择 PG 或 FPG。"""
    return _solve(H, Sbar, P, cfg, accelerate=cfg.accelerate)


def _solve(H: ChannelLike, Sbar: np.ndarray, P: float, cfg: SolverConfig,
           accelerate: bool) -> SolverReport:
    channel = as_channel(H)
    Sbar = np.asarray(Sbar, dtype=float)
    if Sbar.shape[0] != 2 * channel.K:
        raise DomainError(f"S̄ 行数 {Sbar.shape[0]} 与 2K={2 * channel.K} 不符")
    if not P > 0:
        raise DomainError(f"总功率 P 必须为正，当前 P={P}")

    method = "fpg" if accelerate else "pg"
    attrs = {"method": method, "N": channel.N, "K": channel.K, "T": Sbar.shape[1]}
    with trace_span(_tracer, "solver.solve", attrs) as span:
        report = _iterate(channel, Sbar, P, cfg, accelerate, method)
        span.set_attribute("iterations", report.iterations)
        span.set_attribute("stop_reason", report.stop_reason.value)

    record_solver_metrics(
        method=method,
        iterations=report.iterations,
        duration_ms=report.wall_seconds * 1000,
        stop_reason=report.stop_reason.value,
    )
    if report.line_search_failures:
        logger.warning(
            "线搜索未找到满足充分下降的步长 | method={} | failures={} | iters={}",
            method, report.line_search_failures, report.iterations,
        )
    logger.debug("求解完成 | {}", report.summary())
    return report


def _iterate(channel: Channel, Sbar: np.ndarray, P: float, cfg: SolverConfig,
             accelerate: bool, method: str) -> SolverReport:
    obj = SmoothedObjective(lift(channel), Sbar, cfg.sigma)
    report = SolverReport(method=method, P=P)
    search = BacktrackingLineSearch(cfg)

    def proj(d: float, X: np.ndarray) -> DecisionPoint:
        return project(d, X, P)

    def monitored(value: float, point: DecisionPoint) -> float:
        return obj.exact(point) if cfg.stop_on == StopOn.EXACT else value

    z = initial_point(channel, Sbar, P, cfg)
    f_z = obj.value(z)
    record = IterationRecord(iteration=0, f_smooth=f_z, f_exact=obj.exact(z), gamma=0.0, backtracks=0)
    report.record(record)
    z_prev, beta = z, 1.0
    window = ImprovementWindow(cfg.tol, cfg.stop_window)
    window.reset(monitored(f_z, z))
    stop = StopReason.MAX_ITERS
    iteration = 0

    for iteration in range(1, cfg.max_iters + 1):
        if accelerate:
            beta_next = next_beta(beta)
            w = z.extrapolate(z_prev, (beta - 1.0) / beta_next)
        else:
            beta_next, w = 1.0, z

        f_w, grad_d, grad_X = obj.value_and_gradient(w)
        step = search.search(obj, w, f_w, grad_d, grad_X, proj)
        backtracks = step.backtracks

        if accelerate and cfg.restart_on_increase and step.value > f_z:
            # 重启：β 置 1，从 z 重做一步普通 PG
            report.restarts += 1
            beta_next = 1.0
            _, grad_d, grad_X = obj.value_and_gradient(z)
            step = search.search(obj, z, f_z, grad_d, grad_X, proj)
            backtracks += step.backtracks

        if step.failed and step.value > f_z:
            candidate, f_candidate = z, f_z
        else:
            candidate, f_candidate = step.point, step.value

        z_prev, z, f_z, beta = z, candidate, f_candidate, beta_next
        record = IterationRecord(
            iteration=iteration,
            f_smooth=f_z,
            f_exact=obj.exact(z),
            gamma=step.gamma,
            backtracks=backtracks,
            line_search_failed=step.failed,
        )
        report.record(record, keep=iteration % cfg.trace_every == 0)
        if iteration % cfg.trace_every == 0:
            logger.trace(
                "迭代 | method={} | l={} | f={:.6g} | exact={:.6g} | γ={:.3g} | bt={}",
                method, iteration, record.f_smooth, record.f_exact, step.gamma, backtracks,
            )

        if not window.update(monitored(f_z, z)):
            continue

        if cfg.continuation_enabled and obj.sigma > cfg.sigma_floor:
            # 连续化：收紧 σ 后从当前点继续，外推动量清零
            obj = obj.with_sigma(max(cfg.sigma_floor, obj.sigma * cfg.sigma_decay))
            f_z = obj.value(z)
            window.reset(monitored(f_z, z))
            z_prev, beta = z, 1.0
            logger.debug("σ 连续化 | method={} | l={} | σ={:.4g}", method, iteration, obj.sigma)
            continue

        stop = StopReason.TOLERANCE
        break

    report.sigma_final = obj.sigma
    report.finish(z, iteration, stop, last=record)
    return report

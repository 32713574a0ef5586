"""快速不变量自检：梯度有限差分、投影最优性、平滑夹逼、SER 上界抽查。

每项检查独立计时并返回 CheckResult，run_checks 汇总为 CheckSuiteReport。
quick=True 时缩小实例规模与样本量。
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.config import settings
from src.config.schemas import SolverConfig
from src.optim.objective import DecisionPoint, SmoothedObjective
from src.optim.solver import project, solve_fpg
from src.phy.channel import Channel, is_constant_envelope, lift, rayleigh_channel, receive, stack_real, unstack_real
from src.phy.constellation import decide, make_constellation
from src.evaluation.metrics import ser_upper_bound
from src.utils.logger import logger

GradientFn = Callable[[SmoothedObjective, DecisionPoint], Tuple[float, np.ndarray]]

FD_STEP = 1e-6
GRADIENT_RTOL = 1e-5
SANDWICH_SLACK = 1e-12
SER_SIGMAS = 3.0


def analytic_gradient(obj: SmoothedObjective, z: DecisionPoint) -> Tuple[float, np.ndarray]:
    return obj.gradient(z)


@dataclass
class CheckResult:
    """单项检查的结果。"""
    name: str
    passed: bool
    detail: str = ""
    duration_s: float = 0.0


@dataclass
class CheckSuiteReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> List[str]:
        return [r.name for r in self.results if not r.passed]

    def summary(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"[{status}] {r.name:<12} {r.duration_s:6.2f}s  {r.detail}")
        return "\n".join(lines)


def _random_instance(rng: np.random.Generator, N: int, K: int, T: int, L: int = 2) -> Tuple[Channel, np.ndarray]:
    channel = rayleigh_channel(K, N, rng)
    S = make_constellation(L).sample((K, T), rng)
    return channel, S


def _random_ce_point(rng: np.random.Generator, N: int, T: int, P: float = 1.0) -> DecisionPoint:
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(N, T))
    Xbar = math.sqrt(P / N) * np.concatenate([np.cos(phases), np.sin(phases)])
    return DecisionPoint(d=float(rng.uniform(0.05, 0.5)), Xbar=Xbar)


def _finite_difference(obj: SmoothedObjective, z: DecisionPoint, h: float) -> Tuple[float, np.ndarray]:
    """中心差分梯度。"""
    grad_d = (obj.value(DecisionPoint(z.d + h, z.Xbar)) - obj.value(DecisionPoint(z.d - h, z.Xbar))) / (2 * h)
    grad_X = np.empty_like(z.Xbar)
    X = z.Xbar.copy()
    for idx in np.ndindex(X.shape):
        original = X[idx]
        X[idx] = original + h
        f_plus = obj.value(DecisionPoint(z.d, X))
        X[idx] = original - h
        f_minus = obj.value(DecisionPoint(z.d, X))
        X[idx] = original
        grad_X[idx] = (f_plus - f_minus) / (2 * h)
    return grad_d, grad_X


def check_gradient(rng: np.random.Generator, quick: bool = False,
                   gradient_fn: Optional[GradientFn] = None) -> CheckResult:
    """解析梯度对中心差分（步长 1e-6）的最大相对误差 < 1e-5。"""
    gradient_fn = gradient_fn or analytic_gradient
    shapes = [(8, 2, 1), (8, 2, 3)] if quick else [
        (N, K, T) for N in (8, 32) for K in (2, 8) for T in (1, 10)
    ]
    instances = 4 if quick else 20
    worst = 0.0
    for k in range(instances):
        N, K, T = shapes[k % len(shapes)]
        channel, S = _random_instance(rng, N, K, T)
        obj = SmoothedObjective(lift(channel), stack_real(S), sigma=0.05)
        z = _random_ce_point(rng, N, T)
        grad_d, grad_X = gradient_fn(obj, z)
        fd_d, fd_X = _finite_difference(obj, z, FD_STEP)
        analytic = np.concatenate([[grad_d], np.ravel(grad_X)])
        numeric = np.concatenate([[fd_d], np.ravel(fd_X)])
        scale = max(float(np.max(np.abs(numeric))), 1e-12)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return CheckResult(
        name="gradient",
        passed=worst < GRADIENT_RTOL,
        detail=f"instances={instances} max_rel_err={worst:.2e}",
    )


def check_projection(rng: np.random.Generator, quick: bool = False) -> CheckResult:
    """闭式投影与密集角度网格搜索一致（网格分辨率内），且幂等。"""
    n_pairs = 200 if quick else 1000
    n_angles = 2000 if quick else 10_000
    P, N = 1.0, 4
    amplitude = math.sqrt(P / N)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    grid = amplitude * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    resolution = amplitude * (2.0 * np.pi / n_angles)

    pairs = rng.normal(scale=rng.uniform(0.01, 3.0, size=(n_pairs, 1)), size=(n_pairs, 2))
    # 每 N 个 pair 拼成一个 2N×1 的列
    columns = pairs.reshape(-1, N, 2)
    violations = 0
    not_idempotent = 0
    infeasible = 0
    for col in columns:
        X_tilde = np.concatenate([col[:, 0], col[:, 1]])[:, None]
        z = project(-1.0, X_tilde, P)
        twice = project(z.d, z.Xbar, P)
        if not np.all(np.abs(twice.Xbar - z.Xbar) <= 4 * np.spacing(amplitude)):
            not_idempotent += 1
        if not is_constant_envelope(z.Xbar, P) or z.d != 0.0:
            infeasible += 1
        for j in range(N):
            v = col[j]
            p = np.array([z.Xbar[j, 0], z.Xbar[j + N, 0]])
            closed = float(np.linalg.norm(v - p))
            best = float(np.min(np.linalg.norm(grid - v, axis=1)))
            if closed > best + 1e-12 or best - closed > resolution:
                violations += 1

    passed = violations == 0 and not_idempotent == 0 and infeasible == 0
    return CheckResult(
        name="projection",
        passed=passed,
        detail=f"pairs={len(columns) * N} grid={n_angles} "
               f"violations={violations} non_idempotent={not_idempotent} infeasible={infeasible}",
    )


def check_sandwich(rng: np.random.Generator, quick: bool = False) -> CheckResult:
    """exact ≤ smooth ≤ exact + σ·log(4KT)。"""
    n_points = 100 if quick else 1000
    per_instance = 50
    violations = 0
    for start in range(0, n_points, per_instance):
        N, K, T = int(rng.integers(2, 17)), int(rng.integers(1, 5)), int(rng.integers(1, 11))
        channel, S = _random_instance(rng, N, K, T)
        sigma = float(rng.choice([0.01, 0.05, 0.2]))
        obj = SmoothedObjective(lift(channel), stack_real(S), sigma)
        for _ in range(min(per_instance, n_points - start)):
            z = DecisionPoint(d=float(rng.uniform(-0.5, 2.0)), Xbar=rng.normal(size=(2 * N, T)))
            exact, smooth = obj.exact(z), obj.value(z)
            if not (exact <= smooth + SANDWICH_SLACK and smooth <= exact + obj.sandwich_gap + SANDWICH_SLACK):
                violations += 1
    return CheckResult(
        name="sandwich",
        passed=violations == 0,
        detail=f"points={n_points} violations={violations}",
    )


def check_ser_bound(rng: np.random.Generator, quick: bool = False) -> CheckResult:
    """内部星座点的经验 SER ≤ 解析上界 + 3 个标准误差。"""
    instances = 2 if quick else 4
    draws = 20_000 if quick else 100_000
    N, K, T, L, P = 16, 2, 8, 2, 1.0
    c = make_constellation(L)
    cfg = SolverConfig(max_iters=100 if quick else 300)
    sigma_n = math.sqrt(P / 10 ** (12.0 / 10))
    batch = settings.runtime.trial_batch
    violations, checked = 0, 0

    for _ in range(instances):
        channel, S = _random_instance(rng, N, K, T, L)
        report = solve_fpg(channel, stack_real(S), P, cfg)
        bound = ser_upper_bound(channel, report.Xbar, report.d, stack_real(S), sigma_n, c)
        if not bound.interior.any() or report.d <= 0:
            continue

        X = unstack_real(report.Xbar)
        errors = np.zeros((K, T), dtype=np.int64)
        remaining = draws
        while remaining > 0:
            n = min(batch, remaining)
            Y = receive(channel, X, sigma_n, rng, draws=n)
            errors += (decide(Y, report.d, c) != S[None]).sum(axis=0)
            remaining -= n

        ser = errors / draws
        stderr = np.sqrt(ser * (1.0 - ser) / draws)
        mask = bound.interior
        checked += int(mask.sum())
        violations += int(np.sum(ser[mask] > bound.per_slot[mask] + SER_SIGMAS * stderr[mask] + 1.0 / draws))

    return CheckResult(
        name="ser-bound",
        passed=violations == 0,
        detail=f"interior_symbols={checked} draws={draws} violations={violations}",
    )


def run_checks(quick: bool = False, seed: int = 0,
               gradient_fn: Optional[GradientFn] = None) -> CheckSuiteReport:
    """依次执行全部检查。gradient_fn 用于替换被检查的梯度实现。"""
    report = CheckSuiteReport()
    checks = [
        ("gradient", lambda rng: check_gradient(rng, quick, gradient_fn)),
        ("projection", lambda rng: check_projection(rng, quick)),
        ("sandwich", lambda rng: check_sandwich(rng, quick)),
        ("ser-bound", lambda rng: check_ser_bound(rng, quick)),
    ]
    for index, (name, fn) in enumerate(checks):
        rng = np.random.default_rng([seed, index])
        start = time.perf_counter()
        try:
            result = fn(rng)
        except Exception as e:
            logger.exception("检查执行异常 | check={}", name)
            result = CheckResult(name=name, passed=False, detail=f"异常: {e}")
        result.duration_s = time.perf_counter() - start
        log = logger.info if result.passed else logger.error
        log("检查 {} | passed={} | {} | {:.2f}s", name, result.passed, result.detail, result.duration_s)
        report.results.append(result)
    return report

"""最坏 SER 最小化目标：精确 minimax 目标、log-sum-exp 平滑目标及其解析梯度。

记 e_{i,t} = h̄_iᵀx̄_t − d·s̄_{i,t}（i = 1…2K, t = 1…T），则
    精确目标   max_{i,t} |e_{i,t}| − d
    平滑目标   f = σ·log Σ_{i,t} [exp((e_{i,t} − d)/σ) + exp((−e_{i,t} − d)/σ)]
共 4KT 个指数项，因此 精确 ≤ f ≤ 精确 + σ·log(4KT)。

σ = 0.05 时指数项极易溢出，log-sum-exp 与权重都走平移形式（scipy.special.logsumexp）。
目标对任意实数 d 有定义，可行性由求解器的投影负责。
"""

from dataclasses import dataclass
from typing import Protocol, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from src.errors import ConfigurationError, DomainError
from src.phy.channel import CEPoint, RealChannel


@dataclass(frozen=True)
class DecisionPoint:
    """决策变量 z = (d, x̄_1, …, x̄_T)，X̄ 为 2N×T 实矩阵。"""

    d: float
    Xbar: np.ndarray

    def extrapolate(self, previous: "DecisionPoint", coef: float) -> "DecisionPoint":
        """z + coef·(z − previous)，FISTA 外推点（可能不可行）。"""
        if coef == 0.0:
            return self
        return DecisionPoint(
            d=self.d + coef * (self.d - previous.d),
            Xbar=self.Xbar + coef * (self.Xbar - previous.Xbar),
        )

    def sq_distance(self, other: "DecisionPoint") -> float:
        """‖z − other‖²。"""
        diff = self.Xbar - other.Xbar
        return float((self.d - other.d) ** 2 + np.vdot(diff, diff).real)

    def to_ce_point(self, P: float) -> CEPoint:
        return CEPoint(Xbar=self.Xbar, P=P)


Gradient = Tuple[float, np.ndarray]


class DifferentiableObjective(Protocol):
    """线搜索与投影梯度所需的最小接口。"""

    def value(self, z: DecisionPoint) -> float: ...

    def value_and_gradient(self, z: DecisionPoint) -> Tuple[float, float, np.ndarray]: ...


class SmoothedObjective:
    """平滑 minimax 目标 f，持有 H̄、S̄ 与 σ，本身无状态，可并发求值。"""

    def __init__(
        self,
        channel: Union[RealChannel, np.ndarray],
        Sbar: np.ndarray,
        sigma: float,
    ):
        Hbar = channel.Hbar if isinstance(channel, RealChannel) else np.asarray(channel, dtype=float)
        Sbar = np.asarray(Sbar, dtype=float)
        if not sigma > 0:
            raise ConfigurationError(f"平滑参数 σ 必须为正，当前 σ={sigma}")
        if Hbar.ndim != 2 or Sbar.ndim != 2 or Hbar.shape[0] != Sbar.shape[0]:
            raise DomainError(
                f"H̄ {Hbar.shape} 与 S̄ {Sbar.shape} 维度不匹配（两者行数都应为 2K）"
            )
        self._Hbar = Hbar
        self._Sbar = Sbar
        self._sigma = float(sigma)

    @property
    def Hbar(self) -> np.ndarray:
        return self._Hbar

    @property
    def Sbar(self) -> np.ndarray:
        return self._Sbar

    @property
    def sigma(self) -> float:
        return self._sigma

    @property
    def n_terms(self) -> int:
        """指数项个数 4KT。"""
        return 2 * self._Sbar.size

    @property
    def sandwich_gap(self) -> float:
        """σ·log(4KT)。"""
        return self._sigma * float(np.log(self.n_terms))

    def with_sigma(self, sigma: float) -> "SmoothedObjective":
        return SmoothedObjective(self._Hbar, self._Sbar, sigma)

    def residual(self, z: DecisionPoint) -> np.ndarray:
        """e = H̄X̄ − d·S̄ (2K×T)。"""
        if z.Xbar.shape != (self._Hbar.shape[1], self._Sbar.shape[1]):
            raise DomainError(
                f"X̄ 形状 {z.Xbar.shape} 与期望 {(self._Hbar.shape[1], self._Sbar.shape[1])} 不符"
            )
        return self._Hbar @ z.Xbar - z.d * self._Sbar

    def exact(self, z: DecisionPoint) -> float:
        """max_{i,t} |e_{i,t}| − d。"""
        return float(np.max(np.abs(self.residual(z))) - z.d)

    def exact_with_gains(self, Xbar: np.ndarray, gains: np.ndarray) -> float:
        """逐时隙增益的推广：max_{i,t} (|h̄_iᵀx̄_t − d_t·s̄_{i,t}| − d_t)。

        gains 全相等时等于 exact()。
        """
        gains = np.broadcast_to(np.asarray(gains, dtype=float), (self._Sbar.shape[1],))
        margin = np.abs(self._Hbar @ Xbar - gains * self._Sbar) - gains
        return float(np.max(margin))

    def _exponents(self, z: DecisionPoint) -> Tuple[np.ndarray, np.ndarray]:
        e = self.residual(z)
        return (e - z.d) / self._sigma, (-e - z.d) / self._sigma

    def value(self, z: DecisionPoint) -> float:
        a_pos, a_neg = self._exponents(z)
        return self._sigma * float(logsumexp(np.stack([a_pos, a_neg])))

    def value_and_gradient(self, z: DecisionPoint) -> Tuple[float, float, np.ndarray]:
        """返回 (f, ∂f/∂d, ∂f/∂X̄)。

        权重 W^P、W^N 以 log-sum-exp 值平移后取指数，平移量在比值中抵消：
            ∂f/∂x̄_t = Σ_i (W^P_{i,t} − W^N_{i,t}) h̄_i / Σ(W^P + W^N)
            ∂f/∂d   = Σ (−W^P(s̄+1) + W^N(s̄−1)) / Σ(W^P + W^N)
        """
        a_pos, a_neg = self._exponents(z)
        lse = float(logsumexp(np.stack([a_pos, a_neg])))
        w_pos = np.exp(a_pos - lse)
        w_neg = np.exp(a_neg - lse)
        grad_X = self._Hbar.T @ (w_pos - w_neg)
        grad_d = float(np.sum(-w_pos * (self._Sbar + 1.0) + w_neg * (self._Sbar - 1.0)))
        return self._sigma * lse, grad_d, grad_X

    def gradient(self, z: DecisionPoint) -> Gradient:
        _, grad_d, grad_X = self.value_and_gradient(z)
        return grad_d, grad_X


def exact_objective(z: DecisionPoint, obj: SmoothedObjective) -> float:
    return obj.exact(z)


def smooth_objective(z: DecisionPoint, obj: SmoothedObjective) -> float:
    return obj.value(z)


def gradient(z: DecisionPoint, obj: SmoothedObjective) -> Gradient:
    return obj.gradient(z)


def least_squares_gain(Hbar: np.ndarray, Xbar: np.ndarray, Sbar: np.ndarray) -> float:
    """给定 X̄ 时 Σ‖H̄x̄_t − d·s̄_t‖² 在 d ≥ 0 上的闭式最优解。"""
    denom = float(np.sum(Sbar * Sbar))
    if denom == 0.0:
        return 0.0
    return max(0.0, float(np.sum(Sbar * (Hbar @ Xbar))) / denom)

"""误码统计、SER 解析上界与 PAPR。

- estimate_ber: Monte-Carlo 误比特/误符号计数（Gray 映射），按批向量化
- ser_upper_bound: 逐用户逐时隙 M^R、M^I 与 2·max{M^R, M^I} 上界
- papr: 逐天线峰均功率比，恒包络信号恒为 1
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erfc

from src.config import settings
from src.errors import DomainError
from src.phy.channel import Channel, lift, receive
from src.phy.constellation import QamConstellation, bits_to_symbols, decide, symbols_to_bits
from src.precoders.baselines import PrecodeResult

# 二项比例正态近似的 95% 分位数
Z_95 = 1.96


def q_function(x):
    """标准高斯尾概率 Q(x) = ½·erfc(x/√2)。"""
    result = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(result) if np.ndim(result) == 0 else result


# ── SER 上界 ──


@dataclass(frozen=True)
class SerBound:
    """SER 上界诊断量。

    Attributes:
        m_real / m_imag: K×T 的 M^R、M^I，取值 [0, 2]。
        per_slot: K×T 的 min(2, 2·max{M^R, M^I})。
        per_user: (K,) 块内逐用户最大值。
        interior: K×T 掩码，符号两个坐标都严格位于电平范围内部。
    """

    m_real: np.ndarray
    m_imag: np.ndarray
    per_slot: np.ndarray
    per_user: np.ndarray
    interior: np.ndarray

    @property
    def worst(self) -> float:
        return float(np.max(self.per_user))


def ser_upper_bound(
    H: Channel,
    Xbar: np.ndarray,
    d,
    Sbar: np.ndarray,
    sigma_n: float,
    constellation: Optional[QamConstellation] = None,
) -> SerBound:
    """M^R_{i,t} = 2Q((d − |Re{h_iᵀx_t} − d·Re{s_{i,t}}|)/(σ_n/√2))，虚部同理。

    d 可以是标量或逐时隙增益 (T,)。未给出星座时按 S̄ 中出现的最大电平判定内部点。

    Raises:
        DomainError: d < 0 或 σ_n ≤ 0。
    """
    gains = np.asarray(d, dtype=float)
    if np.any(gains < 0):
        raise DomainError(f"增益 d 必须非负，当前 d={d!r}")
    if not sigma_n > 0:
        raise DomainError(f"噪声标准差必须为正，当前 σ_n={sigma_n}")

    K = H.K
    distortion = lift(H).Hbar @ Xbar - gains * Sbar
    scale = sigma_n / np.sqrt(2.0)
    m_real = 2.0 * q_function((gains - np.abs(distortion[:K])) / scale)
    m_imag = 2.0 * q_function((gains - np.abs(distortion[K:])) / scale)
    per_slot = np.minimum(2.0, 2.0 * np.maximum(m_real, m_imag))

    max_level = constellation.max_level if constellation is not None else np.max(np.abs(Sbar))
    interior = (np.abs(Sbar[:K]) < max_level) & (np.abs(Sbar[K:]) < max_level)
    return SerBound(
        m_real=m_real,
        m_imag=m_imag,
        per_slot=per_slot,
        per_user=per_slot.max(axis=1),
        interior=interior,
    )


# ── Monte-Carlo 误码统计 ──


@dataclass
class BerEstimate:
    """误码计数器，可结合（merge）以聚合多个块或多批噪声。"""

    bit_errors: int = 0
    total_bits: int = 0
    symbol_errors: int = 0
    total_symbols: int = 0
    user_symbol_errors: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    user_symbols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    user_real_errors: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    user_imag_errors: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @classmethod
    def empty(cls, K: int) -> "BerEstimate":
        return cls(
            user_symbol_errors=np.zeros(K, dtype=np.int64),
            user_symbols=np.zeros(K, dtype=np.int64),
            user_real_errors=np.zeros(K, dtype=np.int64),
            user_imag_errors=np.zeros(K, dtype=np.int64),
        )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits if self.total_bits else 0.0

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.total_symbols if self.total_symbols else 0.0

    @property
    def user_ser(self) -> np.ndarray:
        return _safe_ratio(self.user_symbol_errors, self.user_symbols)

    @property
    def user_ser_real(self) -> np.ndarray:
        return _safe_ratio(self.user_real_errors, self.user_symbols)

    @property
    def user_ser_imag(self) -> np.ndarray:
        return _safe_ratio(self.user_imag_errors, self.user_symbols)

    @property
    def worst_user_ser(self) -> float:
        user_ser = self.user_ser
        return float(user_ser.max()) if user_ser.size else 0.0

    @property
    def ci_halfwidth(self) -> float:
        """BER 的 95% 置信半宽（正态近似）。"""
        if not self.total_bits:
            return 0.0
        p = self.ber
        return Z_95 * float(np.sqrt(p * (1.0 - p) / self.total_bits))

    def merge(self, other: "BerEstimate") -> "BerEstimate":
        if not self.user_symbols.size:
            return other
        if not other.user_symbols.size:
            return self
        return BerEstimate(
            bit_errors=self.bit_errors + other.bit_errors,
            total_bits=self.total_bits + other.total_bits,
            symbol_errors=self.symbol_errors + other.symbol_errors,
            total_symbols=self.total_symbols + other.total_symbols,
            user_symbol_errors=self.user_symbol_errors + other.user_symbol_errors,
            user_symbols=self.user_symbols + other.user_symbols,
            user_real_errors=self.user_real_errors + other.user_real_errors,
            user_imag_errors=self.user_imag_errors + other.user_imag_errors,
        )


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros(num.shape, dtype=float), where=den > 0)


def estimate_ber(
    H: Channel,
    result: PrecodeResult,
    bits: np.ndarray,
    sigma_n: float,
    rng: np.random.Generator,
    trials: int = 1,
    *,
    constellation: QamConstellation,
    batch: Optional[int] = None,
) -> BerEstimate:
    """对同一预编码块做 trials 次独立噪声实现，统计误比特与误符号。

    bits 为 K×(T·bits_per_symbol) 的用户比特矩阵。判决使用方法自己的增益约定
    （CE 方法共享 d，ZF 逐时隙 d_t）。

    Raises:
        DomainError: trials < 1 或比特矩阵与星座不符。
    """
    if trials < 1:
        raise DomainError(f"噪声实现数必须 ≥ 1，当前 trials={trials}")
    c = constellation
    bits = np.asarray(bits, dtype=np.uint8)
    S = bits_to_symbols(bits, c)
    K, T = S.shape
    X = result.X
    # d = 0 时所有判决落到最外层电平
    gains = np.maximum(np.asarray(result.gains, dtype=float), np.finfo(float).tiny)
    batch = batch or settings.runtime.trial_batch

    estimate = BerEstimate.empty(K)
    remaining = trials
    while remaining > 0:
        draws = min(batch, remaining)
        Y = receive(H, X, sigma_n, rng, draws=draws)
        decided = decide(Y, gains, c)
        estimate = estimate.merge(_count_errors(decided, S, bits, c))
        remaining -= draws
    return estimate


def _count_errors(decided: np.ndarray, S: np.ndarray, bits: np.ndarray,
                  c: QamConstellation) -> BerEstimate:
    draws = decided.shape[0]
    K, T = S.shape
    real_err = decided.real != S.real
    imag_err = decided.imag != S.imag
    symbol_err = real_err | imag_err
    bit_err = symbols_to_bits(decided, c) != bits[None]
    return BerEstimate(
        bit_errors=int(bit_err.sum()),
        total_bits=int(bit_err.size),
        symbol_errors=int(symbol_err.sum()),
        total_symbols=draws * K * T,
        user_symbol_errors=symbol_err.sum(axis=(0, 2)).astype(np.int64),
        user_symbols=np.full(K, draws * T, dtype=np.int64),
        user_real_errors=real_err.sum(axis=(0, 2)).astype(np.int64),
        user_imag_errors=imag_err.sum(axis=(0, 2)).astype(np.int64),
    )


# ── PAPR ──


def papr(X: np.ndarray) -> float:
    """逐天线 max_t|x_t|² / mean_t|x_t|²，返回各天线中的最大值。

    接受复 N×T 矩阵或实堆叠 2N×T 矩阵。全零天线按 1 计。
    """
    X = np.asarray(X)
    if np.iscomplexobj(X):
        power = np.abs(X) ** 2
    else:
        N = X.shape[0] // 2
        power = X[:N] ** 2 + X[N:] ** 2
    if power.ndim == 1:
        power = power[:, None]
    peak = power.max(axis=1)
    mean = power.mean(axis=1)
    ratio = np.divide(peak, mean, out=np.ones_like(peak), where=mean > 0)
    return float(ratio.max())

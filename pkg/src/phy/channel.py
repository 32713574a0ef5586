"""下行信道模型。

- Channel: K×N 复信道矩阵（第 i 行为 h_iᵀ），一个衰落块内保持不变
- RealChannel: 2K×2N 实等效形式 [[Re H, −Im H], [Im H, Re H]]
- SymbolBlock / CEPoint: 一个块内的符号矩阵与恒包络发射矩阵
- receive(): y_{i,t} = h_iᵀ x_t + n_{i,t}，n ~ CN(0, σ_n²)

所有随机函数都显式接收 numpy Generator，保证 Monte-Carlo worker 各自拥有独立随机流。
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from src.errors import DomainError

# CE 可行性校验的默认相对容差
CE_RTOL = 1e-12


@dataclass(frozen=True)
class Channel:
    """复下行信道 H (K×N)。"""

    H: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise DomainError(f"信道矩阵必须是非空二维数组，当前形状 {np.shape(self.H)}")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class RealChannel:
    """实等效信道 H̄ (2K×2N)，第 i 行为 h̄_iᵀ。"""

    Hbar: np.ndarray

    @property
    def K(self) -> int:
        return self.Hbar.shape[0] // 2

    @property
    def N(self) -> int:
        return self.Hbar.shape[1] // 2


@dataclass(frozen=True)
class SymbolBlock:
    """一个衰落块内的用户符号 S (K×T)，以及实堆叠形式 S̄ = [Re S; Im S] (2K×T)。"""

    S: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=np.complex128)
        if S.ndim != 2:
            raise DomainError(f"符号块必须是 K×T 二维数组，当前形状 {S.shape}")
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @property
    def Sbar(self) -> np.ndarray:
        return stack_real(self.S)

    @property
    def K(self) -> int:
        return self.S.shape[0]

    @property
    def T(self) -> int:
        return self.S.shape[1]


@dataclass(frozen=True)
class CEPoint:
    """恒包络发射块 X̄ (2N×T)：每个时隙每根天线满足 x̄_j² + x̄_{j+N}² = P/N。"""

    Xbar: np.ndarray
    P: float

    @property
    def N(self) -> int:
        return self.Xbar.shape[0] // 2

    @property
    def T(self) -> int:
        return self.Xbar.shape[1]

    def to_complex(self) -> np.ndarray:
        return unstack_real(self.Xbar)

    def is_feasible(self, rtol: float = CE_RTOL) -> bool:
        return is_constant_envelope(self.Xbar, self.P, rtol=rtol)


def stack_real(Z: np.ndarray) -> np.ndarray:
    """复矩阵 → [Re Z; Im Z]。"""
    Z = np.asarray(Z)
    return np.concatenate([Z.real, Z.imag], axis=0)


def unstack_real(Zbar: np.ndarray) -> np.ndarray:
    """[Re Z; Im Z] → 复矩阵。"""
    half = Zbar.shape[0] // 2
    return Zbar[:half] + 1j * Zbar[half:]


def is_constant_envelope(Xbar: np.ndarray, P: float, rtol: float = CE_RTOL) -> bool:
    """逐天线、逐时隙检查 |x|² = P/N。"""
    N = Xbar.shape[0] // 2
    power = Xbar[:N] ** 2 + Xbar[N:] ** 2
    return bool(np.allclose(power, P / N, rtol=rtol, atol=0.0))


def lift(channel: Channel) -> RealChannel:
    """复信道 → 实等效信道。

    对任意复向量 x 及 x̄ = [Re x; Im x]，有 H̄·x̄ = [Re(Hx); Im(Hx)]。
    """
    H = channel.H
    Hbar = np.block([[H.real, -H.imag], [H.imag, H.real]])
    Hbar.setflags(write=False)
    return RealChannel(Hbar=Hbar)


def rayleigh_channel(K: int, N: int, rng: np.random.Generator) -> Channel:
    """i.i.d. CN(0, 1) 瑞利块衰落信道，实部、虚部方差各 1/2。"""
    scale = np.sqrt(0.5)
    H = scale * (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N)))
    return Channel(H=H)


def complex_noise(shape: tuple[int, ...], sigma_n: float, rng: np.random.Generator) -> np.ndarray:
    """CN(0, σ_n²) 噪声，实部、虚部方差各 σ_n²/2。"""
    scale = sigma_n / np.sqrt(2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


TransmitBlock = Union[CEPoint, np.ndarray]


def as_complex_block(X: TransmitBlock) -> np.ndarray:
    """统一发射块表示：CEPoint 或复 N×T 矩阵 → 复 N×T 矩阵。"""
    if isinstance(X, CEPoint):
        return X.to_complex()
    X = np.asarray(X)
    if np.iscomplexobj(X):
        return X
    raise DomainError("发射块必须是 CEPoint 或复数矩阵")


def receive(
    channel: Channel,
    X: TransmitBlock,
    sigma_n: float,
    rng: np.random.Generator,
    draws: Optional[int] = None,
) -> np.ndarray:
    """接收信号 Y = H·X + N (K×T)。σ_n = 0 时不消耗随机数，返回无噪声结果。

    draws 不为 None 时对同一发射块独立抽取 draws 组噪声，返回 (draws, K, T)。

    Raises:
        DomainError: 维度不符或 σ_n < 0。
    """
    Xc = as_complex_block(X)
    if Xc.ndim == 1:
        Xc = Xc[:, None]
    if Xc.shape[0] != channel.N:
        raise DomainError(f"发射块行数 {Xc.shape[0]} 与天线数 N={channel.N} 不符")
    if sigma_n < 0:
        raise DomainError(f"噪声标准差必须非负，当前 σ_n={sigma_n}")

    Y = channel.H @ Xc
    if draws is not None:
        Y = np.broadcast_to(Y, (draws, *Y.shape))
    if sigma_n > 0:
        Y = Y + complex_noise(Y.shape, sigma_n, rng)
    return Y


def save_channel_csv(channel: Channel, path: Path) -> None:
    """信道导出为 CSV：每行一个用户，每根天线依次写 re,im。"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in channel.H:
            writer.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])


def load_channel_csv(path: Path) -> Channel:
    """读取 save_channel_csv 导出的信道。

    Raises:
        DomainError: 列数为奇数或行长不一致。
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        try:
            rows = [[float(v) for v in row] for row in csv.reader(f) if row]
        except ValueError as e:
            raise DomainError(f"信道文件包含非数值项: {path}") from e
    if not rows:
        raise DomainError(f"信道文件为空: {path}")
    widths = {len(row) for row in rows}
    if len(widths) != 1 or widths.pop() % 2:
        raise DomainError(f"信道文件格式错误（每行需要等长的 re,im 对）: {path}")
    data = np.asarray(rows)
    return Channel(H=data[:, 0::2] + 1j * data[:, 1::2])

"""方形 QAM 星座：字母表构造、Gray 比特映射与接收端判决。

星座点保持未归一化的奇数网格 s_R + j·s_I，s_R, s_I ∈ {±1, ±3, …, ±(2L−1)}，
能量归一化全部由符号成形增益 d 吸收。
比特映射在同相、正交两个维度上各自使用独立的 Gray 码（先 I 后 Q，高位在前）。
"""

from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigurationError, DomainError


def _gray(index: np.ndarray) -> np.ndarray:
    return index ^ (index >> 1)


def _gray_inverse(code: np.ndarray, width: int) -> np.ndarray:
    index = code.copy()
    shift = 1
    while shift < width:
        index ^= index >> shift
        shift <<= 1
    return index


@dataclass(frozen=True)
class QamConstellation:
    """(2L)² 点方形 QAM 字母表。构造后不可变，可被多个 worker 并发读取。

    Attributes:
        L: 每个实维度电平数的一半。
        levels: 升序电平 [−(2L−1), …, −1, 1, …, 2L−1]。
        points: 全部星座点，按 (I 电平索引, Q 电平索引) 行主序排列。
        bits_per_symbol: 2·log2(2L)。
    """

    L: int
    levels: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    bits_per_level: int
    bits_per_symbol: int

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def max_level(self) -> int:
        return 2 * self.L - 1

    @property
    def gray_map(self) -> dict[tuple[int, ...], complex]:
        """比特模式 → 星座点的双射。"""
        bits = symbols_to_bits(self.points, self).reshape(-1, self.bits_per_symbol)
        return {tuple(int(b) for b in row): complex(p) for row, p in zip(bits, self.points)}

    def level_index(self, coord: np.ndarray) -> np.ndarray:
        """奇数电平 → 电平索引 0 … 2L−1。"""
        return ((np.asarray(coord) + self.max_level) // 2).astype(np.int64)

    def is_member(self, symbols: np.ndarray) -> np.ndarray:
        """逐元素判断是否为星座点。"""
        symbols = np.asarray(symbols)
        ok = np.ones(symbols.shape, dtype=bool)
        for coord in (symbols.real, symbols.imag):
            ok &= (coord == np.round(coord)) & (np.abs(coord) <= self.max_level)
            ok &= np.mod(np.round(coord), 2) == 1
        return ok

    def sample(self, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
        """均匀独立抽取星座点。"""
        n_levels = 2 * self.L
        re = self.levels[rng.integers(0, n_levels, size=shape)]
        im = self.levels[rng.integers(0, n_levels, size=shape)]
        return re + 1j * im


def make_constellation(L: int) -> QamConstellation:
    """构造 (2L)² 点方形 QAM。

    L=1 → 4-QAM，L=2 → 16-QAM，L=4 → 64-QAM。

    Raises:
        ConfigurationError: L < 1 或 2L 不是 2 的幂。
    """
    if isinstance(L, bool) or not isinstance(L, (int, np.integer)) or L < 1:
        raise ConfigurationError(f"QAM 阶数 L 必须为正整数，当前 L={L!r}")
    L = int(L)
    if L & (L - 1):
        raise ConfigurationError(f"2L 必须是 2 的幂，当前 L={L}")

    n_levels = 2 * L
    levels = np.arange(-(n_levels - 1), n_levels, 2, dtype=np.float64)
    bits_per_level = n_levels.bit_length() - 1
    re, im = np.meshgrid(levels, levels, indexing="ij")
    points = (re + 1j * im).ravel()
    levels.setflags(write=False)
    points.setflags(write=False)
    return QamConstellation(
        L=L,
        levels=levels,
        points=points,
        bits_per_level=bits_per_level,
        bits_per_symbol=2 * bits_per_level,
    )


def decide(y, d: float, c: QamConstellation):
    """最近星座点判决 dec(y/d)。

    逐实维度把 y/d 舍入到最近的奇数，并截断到 [−(2L−1), 2L−1]。
    y 可以是标量或任意形状数组；d 可以是标量或可与 y 广播的正数组（ZF 的逐时隙增益）。

    Raises:
        DomainError: d ≤ 0。
    """
    d_arr = np.asarray(d, dtype=np.float64)
    if np.any(~(d_arr > 0)):
        raise DomainError(f"判决增益 d 必须为正，当前 d={d!r}")

    u = np.asarray(y) / d_arr
    decided = _nearest_level(u.real, c) + 1j * _nearest_level(u.imag, c)
    if np.ndim(decided) == 0:
        return complex(decided)
    return decided


def _nearest_level(coord: np.ndarray, c: QamConstellation) -> np.ndarray:
    index = np.clip(np.floor((coord + c.max_level) / 2 + 0.5), 0, 2 * c.L - 1)
    return 2 * index - c.max_level


def symbols_to_bits(symbols, c: QamConstellation) -> np.ndarray:
    """星座点序列 → 比特序列（展平的 uint8 数组，每符号 bits_per_symbol 位）。

    对于二维输入 (K, T)，返回形状 (K, T·bits_per_symbol)，每个用户一行。

    Raises:
        DomainError: 输入含非星座点。
    """
    symbols = np.asarray(symbols)
    if not np.all(c.is_member(symbols)):
        raise DomainError("输入包含不属于当前星座的符号")

    width = c.bits_per_level
    shifts = np.arange(width - 1, -1, -1)
    i_code = _gray(c.level_index(symbols.real))
    q_code = _gray(c.level_index(symbols.imag))
    i_bits = (i_code[..., None] >> shifts) & 1
    q_bits = (q_code[..., None] >> shifts) & 1
    bits = np.concatenate([i_bits, q_bits], axis=-1).astype(np.uint8)
    if symbols.ndim <= 1:
        return bits.reshape(-1)
    return bits.reshape(*symbols.shape[:-1], -1)


def bits_to_symbols(bits, c: QamConstellation) -> np.ndarray:
    """比特序列 → 星座点序列，symbols_to_bits 的逆映射。

    最后一维长度必须能被 bits_per_symbol 整除；二维输入按行（用户）处理。

    Raises:
        DomainError: 长度不整除或含 0/1 以外的值。
    """
    bits = np.asarray(bits)
    bps = c.bits_per_symbol
    if bits.ndim == 0 or bits.shape[-1] % bps:
        raise DomainError(
            f"比特长度 {bits.shape[-1] if bits.ndim else 0} 不能被每符号比特数 {bps} 整除"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise DomainError("比特序列只能包含 0 和 1")

    width = c.bits_per_level
    groups = bits.reshape(*bits.shape[:-1], -1, bps).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1)
    i_code = groups[..., :width] @ weights
    q_code = groups[..., width:] @ weights
    re = c.levels[_gray_inverse(i_code, width)]
    im = c.levels[_gray_inverse(q_code, width)]
    return re + 1j * im

"""五种预编码方法的注册实现。"""

from typing import Optional

import numpy as np

from src.config.schemas import SolverConfig
from src.optim.solver import solve_fpg, solve_pg
from src.phy.channel import Channel, stack_real
from src.precoders.base import BasePrecoder, PrecoderRegistry
from src.precoders.baselines import (
    PrecodeResult,
    ce_zf_precode,
    mui_min_precode,
    solver_result,
    zf_precode,
)


class ZfPrecoder(BasePrecoder):
    constant_envelope = False

    @property
    def name(self) -> str:
        return "zf"

    @property
    def description(self) -> str:
        return "无恒包络约束的迫零预编码，逐时隙功率归一化"

    def precode(self, channel: Channel, S: np.ndarray, P: float,
                seed: Optional[int] = None) -> PrecodeResult:
        return zf_precode(channel, S, P)


class CeZfPrecoder(BasePrecoder):
    @property
    def name(self) -> str:
        return "ce-zf"

    @property
    def description(self) -> str:
        return "迫零解逐天线投影到恒包络集合，最小二乘拟合增益"

    def precode(self, channel: Channel, S: np.ndarray, P: float,
                seed: Optional[int] = None) -> PrecodeResult:
        return ce_zf_precode(channel, S, P)


class _IterativePrecoder(BasePrecoder):
    """持有 SolverConfig 的迭代方法基类。"""

    iterative = True

    def __init__(self, cfg: Optional[SolverConfig] = None):
        self._cfg = cfg or SolverConfig()

    @property
    def config(self) -> SolverConfig:
        return self._cfg

    def _config_for(self, seed: Optional[int]) -> SolverConfig:
        if seed is None:
            return self._cfg
        return self._cfg.model_copy(update={"seed": seed})


class MuiMinPrecoder(_IterativePrecoder):
    @property
    def name(self) -> str:
        return "mui-min"

    @property
    def description(self) -> str:
        return "恒包络集合上最小化多用户干扰总功率（交替投影梯度与增益更新）"

    def precode(self, channel: Channel, S: np.ndarray, P: float,
                seed: Optional[int] = None) -> PrecodeResult:
        return mui_min_precode(channel, S, P, self._config_for(seed))


class PgPrecoder(_IterativePrecoder):
    @property
    def name(self) -> str:
        return "pg"

    @property
    def description(self) -> str:
        return "平滑最坏 SER 目标的投影梯度，回溯线搜索"

    def precode(self, channel: Channel, S: np.ndarray, P: float,
                seed: Optional[int] = None) -> PrecodeResult:
        return solver_result(solve_pg(channel, stack_real(np.asarray(S)), P, self._config_for(seed)))


class FpgPrecoder(_IterativePrecoder):
    @property
    def name(self) -> str:
        return "fpg"

    @property
    def description(self) -> str:
        return "FISTA 外推加速的投影梯度"

    def precode(self, channel: Channel, S: np.ndarray, P: float,
                seed: Optional[int] = None) -> PrecodeResult:
        return solver_result(solve_fpg(channel, stack_real(np.asarray(S)), P, self._config_for(seed)))


def build_registry(cfg: Optional[SolverConfig] = None) -> PrecoderRegistry:
    """注册全部五种方法；迭代方法共享同一份 SolverConfig。"""
    cfg = cfg or SolverConfig()
    registry = PrecoderRegistry()
    registry.register(ZfPrecoder())
    registry.register(CeZfPrecoder())
    registry.register(MuiMinPrecoder(cfg))
    registry.register(PgPrecoder(cfg))
    registry.register(FpgPrecoder(cfg))
    registry.register_alias("ce_zf", "ce-zf")
    registry.register_alias("muimin", "mui-min")
    return registry

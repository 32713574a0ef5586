"""实验与求解器配置模型。

所有 Pydantic 模型集中管理，保证配置契约清晰：
- SolverConfig: PG / FPG / MUImin 迭代参数，默认值与仿真设置一致（σ=0.05, tol=1e-4, 5000 次）
- ExperimentConfig: 一次 SNR 扫描或运行时基准的完整描述

未知字段一律拒绝（extra="forbid"），配置文件拼写错误不会被静默忽略。
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config.settings import settings
from src.errors import ConfigurationError


class Method(str, Enum):
    """可参与比较的预编码方法。"""

    ZF = "zf"
    CE_ZF = "ce-zf"
    MUI_MIN = "mui-min"
    PG = "pg"
    FPG = "fpg"

    @property
    def needs_zf(self) -> bool:
        """是否依赖 ZF 解（要求 N ≥ K 且 H 行满秩）。"""
        return self in (Method.ZF, Method.CE_ZF)


class InitMode(str, Enum):
    """求解器初始化方式。"""

    RANDOM_PHASE = "random-phase"
    CE_ZF = "ce-zf"


class StopOn(str, Enum):
    """停止准则监控的目标函数。"""

    SMOOTH = "smooth"
    EXACT = "exact"


class SolverConfig(BaseModel):
    """投影梯度类求解器参数。

    线搜索常数：初始步长 initial_step，收缩因子 shrink (η)，
    充分下降常数 sufficient_decrease (c)，最多回溯 max_backtracks 次；
    每次接受的步长翻倍后作为下一轮的初始步长。

    停止准则：最近 min(l, stop_window) 次迭代的平均改进量小于 tol。
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float = Field(0.05, gt=0, description="log-sum-exp 平滑参数 σ")
    tol: float = Field(1e-4, gt=0, description="每次迭代平均目标改进量阈值")
    stop_window: int = Field(10, ge=1, description="平均改进量的统计窗口（迭代数）")
    max_iters: int = Field(5000, ge=1)
    initial_step: float = Field(1.0, gt=0)
    shrink: float = Field(0.5, gt=0, lt=1)
    sufficient_decrease: float = Field(1e-4, ge=0, lt=0.5)
    max_backtracks: int = Field(30, ge=0)
    accelerate: bool = False
    restart_on_increase: bool = False
    init: InitMode = InitMode.RANDOM_PHASE
    seed: int = 0
    trace_every: int = Field(1, ge=1, description="迭代轨迹记录间隔（稀疏化）")
    sigma_decay: float = Field(1.0, gt=0, le=1, description="连续化：每次收敛后 σ 乘以该因子，1.0 表示关闭")
    sigma_min: Optional[float] = Field(None, gt=0)
    stop_on: StopOn = StopOn.SMOOTH

    @property
    def continuation_enabled(self) -> bool:
        return self.sigma_decay < 1.0

    @property
    def sigma_floor(self) -> float:
        return self.sigma_min if self.sigma_min is not None else self.sigma


class ExperimentConfig(BaseModel):
    """SNR 扫描实验描述。

    snr_db 为 P/σ_n² 的 dB 值；trials 为信道实现数；
    每个信道实现上各方法共享同一组信道、符号与噪声（公共随机数）。
    """

    model_config = ConfigDict(extra="forbid")

    N: int = Field(64, ge=1, description="基站天线数")
    K: int = Field(8, ge=1, description="用户数")
    T: int = Field(10, ge=1, description="块长度")
    P: float = Field(1.0, gt=0, description="总发射功率")
    L: int = Field(2, ge=1, description="QAM 阶数参数，电平 ±1..±(2L-1)")
    snr_db: List[float] = Field(default_factory=lambda: [20.0, 25.0, 30.0], min_length=1)
    methods: List[Method] = Field(
        default_factory=lambda: [Method.ZF, Method.CE_ZF, Method.MUI_MIN, Method.PG, Method.FPG],
        min_length=1,
    )
    trials: int = Field(100, ge=1)
    noise_trials: int = Field(1, ge=1, description="每个信道实现、每个 SNR 点的噪声实现数")
    solver: SolverConfig = Field(default_factory=SolverConfig)
    seed: int = 0
    workers: int = Field(default_factory=lambda: settings.runtime.workers, ge=1)
    output: Optional[Path] = None
    timing: bool = False

    @field_validator("methods")
    @classmethod
    def _dedupe_methods(cls, methods: List[Method]) -> List[Method]:
        """保序去重。"""
        return list(dict.fromkeys(methods))

    @field_validator("L")
    @classmethod
    def _check_power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"2L 必须是 2 的幂，当前 L={value}")
        return value

    @model_validator(mode="after")
    def _check_zf_feasible(self) -> "ExperimentConfig":
        needs_zf = any(m.needs_zf for m in self.methods) or (
            self.solver.init == InitMode.CE_ZF
            and any(m in (Method.PG, Method.FPG) for m in self.methods)
        )
        if needs_zf and self.N < self.K:
            raise ValueError(
                f"ZF 类方法要求 N ≥ K，当前 N={self.N}, K={self.K}"
            )
        return self

    @property
    def method_names(self) -> List[str]:
        return [m.value for m in self.methods]


def build_experiment_config(values: dict) -> ExperimentConfig:
    """校验原始字典并构造 ExperimentConfig，校验失败统一转换为 ConfigurationError。"""
    from pydantic import ValidationError

    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(_format_validation_error(e)) from e


def build_solver_config(values: dict) -> SolverConfig:
    """同 build_experiment_config，用于单独的求解器配置。"""
    from pydantic import ValidationError

    try:
        return SolverConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(_format_validation_error(e)) from e


def _format_validation_error(error) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item.get("loc", ())) or "config"
        parts.append(f"{loc}: {item.get('msg', '')}")
    return "配置校验失败 | " + "; ".join(parts)

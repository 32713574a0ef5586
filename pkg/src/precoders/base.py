"""预编码器抽象基类与注册中心。

所有方法继承 BasePrecoder，实现 precode 即可被实验框架按名称发现和调用。
"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from src.observability import get_tracer
from src.observability.instruments import record_precoder_run, trace_span
from src.phy.channel import Channel
from src.precoders.baselines import PrecodeResult

_tracer = get_tracer(__name__)


@dataclass(frozen=True)
class TimedResult:
    """PrecodeResult 与墙钟耗时。"""
    result: PrecodeResult
    runtime_s: float


class BasePrecoder(ABC):
    """预编码器抽象基类。

    子类需要实现：
        - name: 方法名（唯一标识，与配置中的 methods 对应）
        - description: 一句话说明
        - precode: 给定信道与符号块，返回 PrecodeResult
    """

    constant_envelope: bool = True
    """输出是否满足恒包络约束。"""

    iterative: bool = False
    """是否为迭代方法（报告迭代次数与求解轨迹）。"""

    @property
    @abstractmethod
    def name(self) -> str:
        """方法名。"""

    @property
    @abstractmethod
    def description(self) -> str:
        """方法说明。"""

    @abstractmethod
    def precode(
        self,
        channel: Channel,
        S: np.ndarray,
        P: float,
        seed: Optional[int] = None,
    ) -> PrecodeResult:
        """计算一个块的发射信号。

        Args:
            channel: K×N 复信道。
            S: K×T 符号块。
            P: 总发射功率。
            seed: 迭代方法随机初始化使用的种子；None 表示使用配置中的种子。
        """


class PrecoderRegistry:
    """预编码器注册中心，支持别名（如 ce_zf → ce-zf）。"""

    def __init__(self):
        self._precoders: Dict[str, BasePrecoder] = {}
        self._aliases: Dict[str, str] = {}

    def register(self, precoder: BasePrecoder) -> "PrecoderRegistry":
        """注册预编码器，支持链式调用。"""
        if precoder.name in self._precoders:
            raise ValueError(f"预编码器 '{precoder.name}' 已注册，不允许重复注册")
        self._precoders[precoder.name] = precoder
        return self

    def register_alias(self, alias: str, target: str) -> "PrecoderRegistry":
        if alias in self._precoders or alias in self._aliases:
            raise ValueError(f"别名 '{alias}' 与已有名称冲突")
        if target not in self._precoders:
            raise ValueError(f"目标预编码器 '{target}' 未注册，无法创建别名 '{alias}'")
        self._aliases[alias] = target
        return self

    def get(self, name: str) -> BasePrecoder:
        canonical = self._aliases.get(name, name)
        if canonical not in self._precoders:
            raise KeyError(f"预编码器 '{name}' 未注册，可用方法: {self.names}")
        return self._precoders[canonical]

    def run(
        self,
        name: str,
        channel: Channel,
        S: np.ndarray,
        P: float,
        seed: Optional[int] = None,
    ) -> TimedResult:
        """执行指定方法并计时，每次执行创建 precoder.run.{name} span。"""
        precoder = self.get(name)
        with trace_span(_tracer, f"precoder.run.{precoder.name}", {"method": precoder.name}) as span:
            start = time.perf_counter()
            result = precoder.precode(channel, S, P, seed=seed)
            elapsed = time.perf_counter() - start
            span.set_attribute("iterations", result.iterations)
        record_precoder_run(precoder.name)
        return TimedResult(result=result, runtime_s=elapsed)

    @property
    def names(self) -> List[str]:
        return list(self._precoders.keys())

    def summary(self) -> str:
        """可读的方法列表。"""
        lines = [f"已注册预编码方法（共 {len(self._precoders)} 个）："]
        for name, precoder in self._precoders.items():
            tag = "CE" if precoder.constant_envelope else "非CE"
            lines.append(f"- {name} [{tag}]: {precoder.description}")
        return "\n".join(lines)

    def __len__(self) -> int:
        return len(self._precoders)

    def __contains__(self, name: str) -> bool:
        return name in self._precoders or name in self._aliases


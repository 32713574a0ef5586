"""组件工厂模块。

集中组装命令行所需的组件：
- create_command_registry: 注册 sweep / bench / solve-one / check 四个子命令
"""

from __future__ import annotations

from typing import Optional

from src.commands import CommandRegistry
from src.commands.bench_cmd import BenchCommand
from src.commands.check_cmd import CheckCommand
from src.commands.solve_cmd import SolveOneCommand
from src.commands.sweep_cmd import SweepCommand
from src.evaluation.checks import GradientFn
from src.utils.logger import logger


def create_command_registry(gradient_fn: Optional[GradientFn] = None) -> CommandRegistry:
    """创建命令注册表。

    Args:
        gradient_fn: 替换 check 子命令检查的梯度实现，None 表示使用解析梯度。
    """
    registry = CommandRegistry()
    for command in (SweepCommand(), BenchCommand(), SolveOneCommand(), CheckCommand(gradient_fn)):
        registry.register(command)
    logger.debug("命令注册完成 | commands={}", ",".join(registry.commands))
    return registry

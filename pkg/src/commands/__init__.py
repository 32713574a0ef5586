"""命令行子命令模块。

架构：
- BaseCommand: 子命令抽象基类，自行声明参数并执行
- CommandRegistry: 命令注册、argparse 解析与分发，统一把异常映射为退出码

退出码：0 成功；1 自检失败或运行期错误；2 配置/参数错误（不写任何输出文件）。

使用方式：
    registry = CommandRegistry()
    registry.register(SweepCommand())
    exit_code = registry.dispatch(["sweep", "--config", "configs/qam16_sweep.cfg"])
"""

import argparse
import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

from src.errors import ConfigurationError, PrecodingError
from src.utils.logger import logger, set_level

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


@dataclass
class CommandContext:
    """命令执行上下文：输出流，便于测试捕获。"""

    out: TextIO = field(default_factory=lambda: sys.stdout)

    def echo(self, text: str = "") -> None:
        print(text, file=self.out)


class BaseCommand(ABC):
    """子命令抽象基类。"""

    @property
    @abstractmethod
    def name(self) -> str:
        """子命令名，如 "sweep"。"""
        ...

    @property
    @abstractmethod
    def description(self) -> str:
        """子命令简短描述，用于 --help 展示。"""
        ...

    def configure(self, parser: argparse.ArgumentParser) -> None:
        """声明子命令参数，子类可覆写。"""

    @abstractmethod
    def execute(self, args: argparse.Namespace, ctx: CommandContext) -> int:
        """执行命令并返回退出码。"""
        ...


class CommandRegistry:
    """命令注册器，负责参数解析与路由分发。"""

    def __init__(self, prog: str = "ce-precoding"):
        self._prog = prog
        self._commands: Dict[str, BaseCommand] = {}

    def register(self, command: BaseCommand) -> None:
        """注册一个命令。"""
        self._commands[command.name] = command

    def get(self, name: str) -> Optional[BaseCommand]:
        return self._commands.get(name)

    @property
    def commands(self) -> Dict[str, BaseCommand]:
        return dict(self._commands)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=self._prog,
            description="恒包络最小 SER 预编码：求解、基线对比与误码仿真",
        )
        verbosity = parser.add_mutually_exclusive_group()
        verbosity.add_argument("-v", "--verbose", action="store_true", help="输出 DEBUG 日志")
        verbosity.add_argument("-q", "--quiet", action="store_true", help="只输出警告与错误")
        subparsers = parser.add_subparsers(dest="command", required=True, metavar="<command>")
        for name, command in self._commands.items():
            sub = subparsers.add_parser(name, help=command.description, description=command.description)
            command.configure(sub)
        return parser

    def dispatch(self, argv: Optional[Sequence[str]] = None,
                 ctx: Optional[CommandContext] = None) -> int:
        """解析参数并执行子命令。

        argparse 自身的参数错误以 SystemExit(2) 退出。
        """
        ctx = ctx or CommandContext()
        args = self.build_parser().parse_args(argv)
        if args.verbose:
            set_level("DEBUG")
        elif args.quiet:
            set_level("WARNING")

        command = self._commands[args.command]
        try:
            return command.execute(args, ctx)
        except ConfigurationError as e:
            logger.debug("配置错误 | command={} | err={}", args.command, e)
            print(f"配置错误: {e}", file=sys.stderr)
            return EXIT_CONFIG
        except PrecodingError as e:
            logger.error("命令 {} 执行失败: {}", args.command, e)
            print(f"错误: {e}", file=sys.stderr)
            return EXIT_FAILED


# ── 实验参数（sweep / bench / solve-one 共用） ──


def _float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的数值列表: {value!r}") from e


def _str_list(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数列表: {value!r}") from e


def add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    """实验与求解器覆盖项；未给出的参数保持 None，不覆盖配置文件。"""
    parser.add_argument("--config", type=Path, help="扁平 key = value 配置文件")
    parser.add_argument("--out", type=Path, help="输出文件路径")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int, help="信道实现数（bench 中为块数）")
    parser.add_argument("--snr", type=_float_list, dest="snr_db", help="P/σ_n² (dB)，逗号分隔")
    parser.add_argument("--methods", type=_str_list, help="逗号分隔：zf,ce-zf,mui-min,pg,fpg")
    parser.add_argument("--N", type=int, dest="N", help="基站天线数")
    parser.add_argument("--K", type=int, dest="K", help="用户数")
    parser.add_argument("--T", type=int, dest="T", help="块长度")
    parser.add_argument("--L", type=int, dest="L", help="QAM 参数，16-QAM 为 2")
    parser.add_argument("--P", type=float, dest="P", help="总发射功率")
    parser.add_argument("--sigma", type=float, help="平滑参数 σ")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--stop-window", type=int, dest="stop_window", help="平均改进量窗口（迭代数）")
    parser.add_argument("--max-iters", type=int, dest="max_iters")
    parser.add_argument("--accelerate", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--restart", action=argparse.BooleanOptionalAction, default=None,
                        dest="restart_on_increase", help="FPG 目标上升时重启")
    parser.add_argument("--init", choices=["random-phase", "ce-zf"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None,
                        help="在扫描 CSV 中记录墙钟耗时（结果不再逐字节可复现）")


_EXPERIMENT_FLAGS = ("seed", "trials", "snr_db", "methods", "N", "K", "T", "L", "P", "workers", "timing")
_SOLVER_FLAGS = ("sigma", "tol", "stop_window", "max_iters", "accelerate", "restart_on_increase", "init")


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """命令行参数 → merge_overrides 所需的覆盖字典。"""
    overrides: Dict[str, Any] = {k: getattr(args, k, None) for k in _EXPERIMENT_FLAGS}
    overrides["solver"] = {k: getattr(args, k, None) for k in _SOLVER_FLAGS}
    return overrides


__all__ = [
    "EXIT_OK",
    "EXIT_FAILED",
    "EXIT_CONFIG",
    "BaseCommand",
    "CommandContext",
    "CommandRegistry",
    "add_experiment_arguments",
    "collect_overrides",
    "int_list",
]

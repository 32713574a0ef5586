"""check 子命令：运行快速不变量自检，全部通过时退出码为 0。"""

import argparse
from typing import Optional

from src.commands import EXIT_FAILED, EXIT_OK, BaseCommand, CommandContext
from src.evaluation.checks import GradientFn, run_checks


class CheckCommand(BaseCommand):
    """gradient_fn 可替换被检查的梯度实现（用于验证检查本身能发现错误）。"""

    def __init__(self, gradient_fn: Optional[GradientFn] = None):
        self._gradient_fn = gradient_fn

    @property
    def name(self) -> str:
        return "check"

    @property
    def description(self) -> str:
        return "梯度、投影、平滑夹逼与 SER 上界自检"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--quick", action="store_true", help="缩小实例规模")
        parser.add_argument("--seed", type=int, default=0)

    def execute(self, args: argparse.Namespace, ctx: CommandContext) -> int:
        report = run_checks(quick=args.quick, seed=args.seed, gradient_fn=self._gradient_fn)
        ctx.echo(report.summary())
        if report.all_passed:
            ctx.echo("\n全部检查通过")
            return EXIT_OK
        ctx.echo(f"\n未通过: {', '.join(report.failed)}")
        return EXIT_FAILED

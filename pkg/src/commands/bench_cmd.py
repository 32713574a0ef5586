"""bench 子命令：逐块运行时基准（方法 × N）。"""

import argparse
from pathlib import Path

from src.commands import (
    EXIT_OK,
    BaseCommand,
    CommandContext,
    add_experiment_arguments,
    collect_overrides,
    int_list,
)
from src.config import settings
from src.config.loader import load_experiment_config
from src.experiment.bench import run_runtime_bench
from src.experiment.records import write_bench_csv


class BenchCommand(BaseCommand):

    @property
    def name(self) -> str:
        return "bench"

    @property
    def description(self) -> str:
        return "测量各方法每个传输块的平均耗时与迭代次数"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        add_experiment_arguments(parser)
        parser.add_argument("--sizes", type=int_list, help="天线数列表，逗号分隔；缺省为 --N")

    def execute(self, args: argparse.Namespace, ctx: CommandContext) -> int:
        cfg = load_experiment_config(args.config, collect_overrides(args))
        out = args.out or cfg.output or Path(settings.runtime.output_dir) / "bench.csv"

        table = run_runtime_bench(cfg, args.sizes or [cfg.N])
        path = write_bench_csv(out, table.records())

        ctx.echo("平均每块耗时（秒）")
        ctx.echo(table.format_table())
        ctx.echo(f"\n已写入 {path}")
        return EXIT_OK

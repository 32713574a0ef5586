"""sweep 子命令：SNR 扫描，写 BerRecord CSV 并打印汇总表。"""

import argparse
from pathlib import Path

from src.commands import (
    EXIT_OK,
    BaseCommand,
    CommandContext,
    add_experiment_arguments,
    collect_overrides,
)
from src.config import settings
from src.config.loader import load_experiment_config
from src.experiment.harness import run_sweep
from src.experiment.records import format_sweep_table, write_records_csv


class SweepCommand(BaseCommand):

    @property
    def name(self) -> str:
        return "sweep"

    @property
    def description(self) -> str:
        return "BER 对 P/σ_n² 的扫描，结果写入 CSV"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        add_experiment_arguments(parser)

    def execute(self, args: argparse.Namespace, ctx: CommandContext) -> int:
        cfg = load_experiment_config(args.config, collect_overrides(args))
        out = args.out or cfg.output or Path(settings.runtime.output_dir) / "sweep.csv"

        records = run_sweep(cfg)
        path = write_records_csv(out, records)

        ctx.echo(format_sweep_table(records))
        ctx.echo(f"\n已写入 {path}（{len(records)} 行）")
        return EXIT_OK

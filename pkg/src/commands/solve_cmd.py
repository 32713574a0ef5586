"""solve-one 子命令：在单个实例上运行一种方法，打印目标值、d 与迭代次数。

实例（信道、符号、求解器种子）与 sweep 的第 0 次试验一致；
--channel 给出信道文件时，K、N 取自文件，符号仍由 --seed 决定。
"""

import argparse

import numpy as np

from src.commands import EXIT_OK, BaseCommand, CommandContext, add_experiment_arguments, collect_overrides
from src.config.loader import load_experiment_config
from src.errors import ConfigurationError
from src.experiment.harness import TrialDraw, draw_trial
from src.optim.objective import DecisionPoint, SmoothedObjective
from src.phy.channel import SymbolBlock, lift, load_channel_csv
from src.phy.constellation import bits_to_symbols, make_constellation
from src.precoders.methods import build_registry
from src.utils.logger import logger


class SolveOneCommand(BaseCommand):

    @property
    def name(self) -> str:
        return "solve-one"

    @property
    def description(self) -> str:
        return "单实例求解，可导出逐迭代轨迹"

    def configure(self, parser: argparse.ArgumentParser) -> None:
        add_experiment_arguments(parser)
        parser.add_argument("--method", default="fpg", help="zf / ce-zf / mui-min / pg / fpg")
        parser.add_argument("--channel", help="信道 CSV（每行一个用户，每天线 re,im）")
        parser.add_argument("--trace", help="逐迭代轨迹 CSV 输出路径")

    def execute(self, args: argparse.Namespace, ctx: CommandContext) -> int:
        overrides = collect_overrides(args)
        overrides["methods"] = [args.method]

        channel = None
        if args.channel:
            try:
                channel = load_channel_csv(args.channel)
            except FileNotFoundError as e:
                raise ConfigurationError(f"信道文件不存在: {args.channel}") from e
            overrides.update(K=channel.K, N=channel.N)

        cfg = load_experiment_config(args.config, overrides)
        c = make_constellation(cfg.L)
        if channel is None:
            draw = draw_trial(cfg, 0, c)
        else:
            rng = np.random.default_rng([cfg.seed, 0])
            bits = rng.integers(0, 2, size=(cfg.K, cfg.T * c.bits_per_symbol), dtype=np.uint8)
            draw = TrialDraw(
                channel=channel, bits=bits, block=SymbolBlock(bits_to_symbols(bits, c)),
                solver_seed=int(rng.integers(0, 2**31 - 1)),
            )

        registry = build_registry(cfg.solver)
        method = cfg.method_names[0]
        timed = registry.run(method, draw.channel, draw.S, cfg.P, seed=draw.solver_seed)
        result = timed.result

        obj = SmoothedObjective(lift(draw.channel), draw.block.Sbar, cfg.solver.sigma)
        ctx.echo(f"方法: {method}  N={cfg.N} K={cfg.K} T={cfg.T} L={cfg.L} P={cfg.P:g}")
        ctx.echo(f"精确目标: {result.exact_objective(obj):.10g}")
        if result.constant_envelope:
            ctx.echo(f"平滑目标: {obj.value(DecisionPoint(result.d, result.Xbar)):.10g}")
            ctx.echo(f"d: {result.d:.10g}")
        else:
            ctx.echo(f"逐时隙增益 d_t: {np.array2string(result.gains, precision=6)}")
        ctx.echo(f"迭代次数: {result.iterations}")
        if result.report is not None:
            ctx.echo(f"停止原因: {result.report.stop_reason.value}")

        if args.trace:
            if result.report is None:
                logger.warning("方法 {} 不是迭代方法，没有可导出的轨迹", method)
            else:
                path = result.report.write_trace_csv(args.trace)
                ctx.echo(f"轨迹已写入 {path}")
        return EXIT_OK

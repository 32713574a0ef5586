"""逐块运行时基准（方法 × 天线数 N）。

顺序执行，避免线程竞争干扰计时；每个单元先跑一个预热块，不计入统计。
块的随机流为 default_rng([seed, N, block])，不同方法在同一 (N, block) 上共享信道与符号。
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.schemas import ExperimentConfig, build_experiment_config
from src.experiment.records import BenchRecord
from src.observability import get_tracer
from src.observability.instruments import trace_span
from src.phy.channel import rayleigh_channel
from src.phy.constellation import make_constellation
from src.precoders.base import PrecoderRegistry
from src.precoders.methods import build_registry
from src.utils.logger import logger

_tracer = get_tracer(__name__)

# 预热块使用的块序号
WARMUP_BLOCK = 2**31 - 1


@dataclass
class BenchCell:
    runtimes: List[float] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)

    @property
    def mean_runtime_s(self) -> float:
        return float(np.mean(self.runtimes)) if self.runtimes else float("nan")

    @property
    def median_iters(self) -> float:
        return float(np.median(self.iterations)) if self.iterations else float("nan")


@dataclass
class RuntimeTable:
    """方法 × N → 平均每块耗时（秒）。"""

    methods: List[str]
    sizes: List[int]
    K: int
    L: int
    blocks: int
    cells: Dict[Tuple[str, int], BenchCell] = field(default_factory=dict)

    def mean_runtime(self, method: str, N: int) -> float:
        return self.cells[(method, N)].mean_runtime_s

    def median_iters(self, method: str, N: int) -> float:
        return self.cells[(method, N)].median_iters

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.methods), len(self.sizes)

    def records(self) -> List[BenchRecord]:
        return [
            BenchRecord(
                method=method, N=N, K=self.K, L=self.L, blocks=self.blocks,
                mean_runtime_s=self.mean_runtime(method, N),
                median_iters=self.median_iters(method, N),
            )
            for method in self.methods
            for N in self.sizes
        ]

    def format_table(self) -> str:
        header = f"{'method':<8}" + "".join(f"{'N=' + str(N):>12}" for N in self.sizes)
        lines = [header]
        for method in self.methods:
            row = "".join(f"{self.mean_runtime(method, N):>12.4f}" for N in self.sizes)
            lines.append(f"{method:<8}{row}")
        return "\n".join(lines)


def run_runtime_bench(
    cfg: ExperimentConfig,
    sizes: Sequence[int],
    registry: Optional[PrecoderRegistry] = None,
) -> RuntimeTable:
    """对每个 N 与方法测量 cfg.trials 个块的平均耗时。

    Raises:
        ConfigurationError: 任一 N 不满足方法的维度要求（在任何计算之前）。
    """
    sizes = list(dict.fromkeys(int(n) for n in sizes)) or [cfg.N]
    per_size = {
        N: build_experiment_config({**cfg.model_dump(exclude={"output"}), "N": N})
        for N in sizes
    }
    c = make_constellation(cfg.L)
    registry = registry or build_registry(cfg.solver)
    table = RuntimeTable(methods=cfg.method_names, sizes=sizes, K=cfg.K, L=cfg.L, blocks=cfg.trials)

    logger.info(
        "基准开始 | K={} L={} T={} | sizes={} | methods={} | blocks={}",
        cfg.K, cfg.L, cfg.T, sizes, cfg.method_names, cfg.trials,
    )
    with trace_span(_tracer, "experiment.bench", {"K": cfg.K, "blocks": cfg.trials}):
        for N, size_cfg in per_size.items():
            for method in size_cfg.method_names:
                cell = BenchCell()
                _run_block(size_cfg, registry, method, c, WARMUP_BLOCK)
                for block in range(size_cfg.trials):
                    runtime, iterations = _run_block(size_cfg, registry, method, c, block)
                    cell.runtimes.append(runtime)
                    cell.iterations.append(iterations)
                table.cells[(method, N)] = cell
                logger.info(
                    "基准单元 | method={} | N={} | mean={:.4f}s | median_iters={}",
                    method, N, cell.mean_runtime_s, cell.median_iters,
                )
    return table


def _run_block(cfg: ExperimentConfig, registry: PrecoderRegistry, method: str,
               c, block: int) -> Tuple[float, int]:
    rng = np.random.default_rng([cfg.seed, cfg.N, block])
    channel = rayleigh_channel(cfg.K, cfg.N, rng)
    S = c.sample((cfg.K, cfg.T), rng)
    solver_seed = int(rng.integers(0, 2**31 - 1))
    timed = registry.run(method, channel, S, cfg.P, seed=solver_seed)
    return timed.runtime_s, timed.result.iterations

"""SNR 扫描：信道/符号抽样、方法调度、误码估计与聚合。

随机流约定（与 worker 数无关）：
- 试验 k 的信道、比特与求解器种子来自 default_rng([seed, k])
- 试验 k 第 j 个 SNR 点的噪声来自 default_rng([seed, k, j, 1])，所有方法使用同一噪声（公共随机数）
每个方法在一个试验中只预编码一次，结果在全部 SNR 点上评估（预编码与噪声水平无关）。
聚合严格按试验序号进行。
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config.schemas import ExperimentConfig
from src.errors import ConfigurationError
from src.evaluation.metrics import BerEstimate, estimate_ber
from src.experiment.records import BerRecord
from src.observability import get_tracer
from src.observability.instruments import propagate_context, trace_span
from src.optim.objective import SmoothedObjective
from src.phy.channel import Channel, SymbolBlock, lift, rayleigh_channel
from src.phy.constellation import QamConstellation, bits_to_symbols, make_constellation
from src.precoders.base import PrecoderRegistry
from src.precoders.methods import build_registry
from src.utils.logger import logger

_tracer = get_tracer(__name__)

# 噪声随机流的标签，区别于信道随机流
NOISE_STREAM = 1


def noise_sigma(snr_db: float, P: float) -> float:
    """σ_n² = P / 10^(snr_db/10)。"""
    return math.sqrt(P / 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class TrialDraw:
    """一次试验的信道与符号块。"""
    channel: Channel
    bits: np.ndarray
    block: SymbolBlock
    solver_seed: int

    @property
    def S(self) -> np.ndarray:
        return self.block.S


def draw_trial(cfg: ExperimentConfig, trial: int, c: QamConstellation) -> TrialDraw:
    rng = np.random.default_rng([cfg.seed, trial])
    channel = rayleigh_channel(cfg.K, cfg.N, rng)
    bits = rng.integers(0, 2, size=(cfg.K, cfg.T * c.bits_per_symbol), dtype=np.uint8)
    solver_seed = int(rng.integers(0, 2**31 - 1))
    block = SymbolBlock(bits_to_symbols(bits, c))
    return TrialDraw(channel=channel, bits=bits, block=block, solver_seed=solver_seed)


@dataclass
class MethodOutcome:
    """一个方法在一次试验中的结果，estimates 按 SNR 点排列。"""
    estimates: List[BerEstimate] = field(default_factory=list)
    iterations: int = 0
    runtime_s: float = 0.0
    exact_objective: float = 0.0


def run_trial(
    cfg: ExperimentConfig,
    registry: PrecoderRegistry,
    trial: int,
    c: QamConstellation,
) -> Dict[str, MethodOutcome]:
    """执行一次试验：每个方法预编码一次，在每个 SNR 点估计误码。"""
    draw = draw_trial(cfg, trial, c)
    Sbar = draw.block.Sbar
    minimax = SmoothedObjective(lift(draw.channel), Sbar, cfg.solver.sigma)
    outcomes: Dict[str, MethodOutcome] = {}

    with trace_span(_tracer, "experiment.trial", {"trial": trial}):
        for method in cfg.method_names:
            timed = registry.run(method, draw.channel, draw.S, cfg.P, seed=draw.solver_seed)
            result = timed.result
            outcome = MethodOutcome(
                iterations=result.iterations,
                runtime_s=timed.runtime_s,
                exact_objective=result.exact_objective(minimax),
            )
            for j, snr_db in enumerate(cfg.snr_db):
                noise_rng = np.random.default_rng([cfg.seed, trial, j, NOISE_STREAM])
                outcome.estimates.append(estimate_ber(
                    draw.channel, result, draw.bits, noise_sigma(snr_db, cfg.P), noise_rng,
                    cfg.noise_trials, constellation=c,
                ))
            outcomes[method] = outcome
    return outcomes


def _check_methods(cfg: ExperimentConfig, registry: PrecoderRegistry) -> None:
    missing = [m for m in cfg.method_names if m not in registry]
    if missing:
        raise ConfigurationError(f"未注册的方法: {missing}，可用方法: {registry.names}")


def run_sweep(cfg: ExperimentConfig, registry: Optional[PrecoderRegistry] = None) -> List[BerRecord]:
    """SNR 扫描，返回每个 (method, snr) 一条记录（方法在外层、SNR 在内层）。

    Raises:
        ConfigurationError: 方法未注册或星座参数非法（在任何计算之前）。
    """
    c = make_constellation(cfg.L)
    registry = registry or build_registry(cfg.solver)
    _check_methods(cfg, registry)

    attrs = {"N": cfg.N, "K": cfg.K, "L": cfg.L, "trials": cfg.trials, "workers": cfg.workers}
    logger.info(
        "扫描开始 | N={} K={} T={} L={} | methods={} | snr={} | trials={} | workers={}",
        cfg.N, cfg.K, cfg.T, cfg.L, cfg.method_names, cfg.snr_db, cfg.trials, cfg.workers,
    )
    with trace_span(_tracer, "experiment.sweep", attrs):
        outcomes = _run_trials(cfg, registry, c)
        records = aggregate(cfg, outcomes)

    for record in records:
        logger.info(
            "扫描结果 | method={} | snr={} | ber={:.4e} | worst_ser={:.4e} | iters={:.1f}",
            record.method, record.snr_db, record.avg_ber, record.worst_user_ser, record.mean_iters,
        )
    return records


def _run_trials(cfg: ExperimentConfig, registry: PrecoderRegistry,
                c: QamConstellation) -> List[Dict[str, MethodOutcome]]:
    if cfg.workers <= 1:
        return [run_trial(cfg, registry, k, c) for k in range(cfg.trials)]

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [
            pool.submit(propagate_context(run_trial), cfg, registry, k, c)
            for k in range(cfg.trials)
        ]
        return [future.result() for future in futures]


def aggregate(cfg: ExperimentConfig, outcomes: List[Dict[str, MethodOutcome]]) -> List[BerRecord]:
    """按试验序号聚合。

    avg_ber 为全部比特合并后的误比特率；worst_user_ser 为逐块最差用户 SER 的平均；
    未开启 timing 时 mean_runtime_s 写 nan。
    """
    records: List[BerRecord] = []
    for method in cfg.method_names:
        per_method = [trial[method] for trial in outcomes]
        iterations = float(np.mean([o.iterations for o in per_method]))
        runtime = float(np.mean([o.runtime_s for o in per_method])) if cfg.timing else math.nan
        exact = float(np.mean([o.exact_objective for o in per_method]))
        for j, snr_db in enumerate(cfg.snr_db):
            merged, worst = _merge_snr(per_method, j)
            records.append(BerRecord(
                method=method,
                N=cfg.N,
                K=cfg.K,
                L=cfg.L,
                snr_db=snr_db,
                trials=len(per_method),
                avg_ber=merged.ber,
                worst_user_ser=worst,
                ci_halfwidth=merged.ci_halfwidth,
                mean_iters=iterations,
                mean_runtime_s=runtime,
                mean_final_exact_obj=exact,
            ))
    return records


def _merge_snr(per_method: List[MethodOutcome], j: int) -> Tuple[BerEstimate, float]:
    merged = BerEstimate()
    worst = []
    for outcome in per_method:
        estimate = outcome.estimates[j]
        merged = merged.merge(estimate)
        worst.append(estimate.worst_user_ser)
    return merged, float(np.mean(worst))

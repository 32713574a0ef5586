"""实验结果记录与 CSV 输出。

CSV 全部经临时文件原子替换写入；浮点数统一 8 位有效数字，
相同配置与种子的重复运行产生逐字节一致的文件。
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Tuple

from src.utils.files import atomic_write_csv, format_float
from src.utils.logger import logger

SWEEP_HEADER: Tuple[str, ...] = (
    "method", "N", "K", "L", "snr_db", "trials", "avg_ber", "worst_user_ser",
    "ci_halfwidth", "mean_iters", "mean_runtime_s", "mean_final_exact_obj",
)

BENCH_HEADER: Tuple[str, ...] = (
    "method", "N", "K", "L", "blocks", "mean_runtime_s", "median_iters",
)


@dataclass(frozen=True)
class BerRecord:
    """一个 (method, snr) 单元的聚合结果。"""

    method: str
    N: int
    K: int
    L: int
    snr_db: float
    trials: int
    avg_ber: float
    worst_user_ser: float
    ci_halfwidth: float
    mean_iters: float
    mean_runtime_s: float
    mean_final_exact_obj: float

    def to_row(self) -> List[str]:
        return [
            self.method, str(self.N), str(self.K), str(self.L),
            format_float(self.snr_db), str(self.trials),
            format_float(self.avg_ber), format_float(self.worst_user_ser),
            format_float(self.ci_halfwidth), format_float(self.mean_iters),
            format_float(self.mean_runtime_s), format_float(self.mean_final_exact_obj),
        ]


@dataclass(frozen=True)
class BenchRecord:
    """运行时基准的一个 (method, N) 单元。"""

    method: str
    N: int
    K: int
    L: int
    blocks: int
    mean_runtime_s: float
    median_iters: float

    def to_row(self) -> List[str]:
        return [
            self.method, str(self.N), str(self.K), str(self.L), str(self.blocks),
            format_float(self.mean_runtime_s), format_float(self.median_iters),
        ]


def write_records_csv(path: Path, records: Iterable[BerRecord]) -> Path:
    records = list(records)
    path = atomic_write_csv(path, SWEEP_HEADER, (r.to_row() for r in records))
    logger.info("扫描结果已写入 | path={} | rows={}", path, len(records))
    return path


def write_bench_csv(path: Path, records: Iterable[BenchRecord]) -> Path:
    records = list(records)
    path = atomic_write_csv(path, BENCH_HEADER, (r.to_row() for r in records))
    logger.info("基准结果已写入 | path={} | rows={}", path, len(records))
    return path


def format_sweep_table(records: Iterable[BerRecord]) -> str:
    """按 SNR 分组打印的汇总表。"""
    lines = [f"{'method':<8} {'snr_db':>7} {'avg_ber':>11} {'worst_ser':>11} {'±ci':>10} {'iters':>8}"]
    for r in sorted(records, key=lambda r: (r.snr_db,)):
        lines.append(
            f"{r.method:<8} {r.snr_db:>7.3g} {r.avg_ber:>11.4e} {r.worst_user_ser:>11.4e} "
            f"{r.ci_halfwidth:>10.2e} {r.mean_iters:>8.1f}"
        )
    return "\n".join(lines)

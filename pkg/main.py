"""恒包络预编码命令行入口。

子命令：
    sweep      - BER 对 P/σ_n² 扫描，写 CSV
    bench      - 每块运行时基准
    solve-one  - 单实例求解，可导出逐迭代轨迹
    check      - 梯度 / 投影 / 平滑夹逼 / SER 上界自检

示例：
    python main.py sweep --config configs/qam16_sweep.cfg --out results/qam16.csv
    python main.py check --quick
"""

import sys
from typing import Optional, Sequence

from src.factory import create_command_registry
from src.observability import init_telemetry, shutdown_telemetry


def main(argv: Optional[Sequence[str]] = None) -> int:
    init_telemetry()
    try:
        return create_command_registry().dispatch(argv)
    finally:
        shutdown_telemetry()


if __name__ == "__main__":
    sys.exit(main())

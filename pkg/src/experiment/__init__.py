from src.experiment.bench import BenchCell, RuntimeTable, run_runtime_bench
from src.experiment.harness import (
    MethodOutcome,
    TrialDraw,
    aggregate,
    draw_trial,
    noise_sigma,
    run_sweep,
    run_trial,
)
from src.experiment.records import (
    BENCH_HEADER,
    SWEEP_HEADER,
    BenchRecord,
    BerRecord,
    format_sweep_table,
    write_bench_csv,
    write_records_csv,
)

__all__ = [
    "BenchCell",
    "RuntimeTable",
    "run_runtime_bench",
    "MethodOutcome",
    "TrialDraw",
    "aggregate",
    "draw_trial",
    "noise_sigma",
    "run_sweep",
    "run_trial",
    "BENCH_HEADER",
    "SWEEP_HEADER",
    "BenchRecord",
    "BerRecord",
    "format_sweep_table",
    "write_bench_csv",
    "write_records_csv",
]

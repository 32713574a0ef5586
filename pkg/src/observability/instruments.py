"""可观测性插桩工具。

- propagate_context: worker 线程恢复提交方的 OTel Context，trial span 挂在 sweep span 下
- record_solver_metrics / record_precoder_run: solver.iterations、solver.duration、precoder.runs
- trace_span: 异常时把 span 标记为 ERROR 并记录异常
"""

from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache, wraps
from typing import Any, Callable, Optional

from opentelemetry import context as otel_context, trace
from opentelemetry.trace import StatusCode

from src.observability import get_meter

# ── 跨线程 Context 传播 ──


def propagate_context(fn: Callable) -> Callable:
    """在提交时捕获 Context，worker 执行 fn 期间 attach，结束后 detach。"""
    ctx = otel_context.get_current()

    @wraps(fn)
    def wrapper(*args, **kwargs):
        token = otel_context.attach(ctx)
        try:
            return fn(*args, **kwargs)
        finally:
            otel_context.detach(token)

    return wrapper


# ── 指标 ──


@dataclass(frozen=True)
class _SolverInstruments:
    iterations: Any
    duration_ms: Any
    precoder_runs: Any


@lru_cache(maxsize=1)
def _instruments() -> _SolverInstruments:
    """首次记录时才向 MeterProvider 申请 instrument，init_telemetry 之前 import 不受影响。"""
    meter = get_meter("ce-precoding")
    return _SolverInstruments(
        iterations=meter.create_histogram("solver.iterations", unit="1", description="每次求解的迭代次数"),
        duration_ms=meter.create_histogram("solver.duration", unit="ms", description="每次求解的墙钟耗时"),
        precoder_runs=meter.create_counter("precoder.runs", unit="1", description="预编码调用次数"),
    )


def record_solver_metrics(*, method: str, iterations: int, duration_ms: float, stop_reason: str) -> None:
    attrs = {"method": method, "stop_reason": stop_reason}
    instruments = _instruments()
    instruments.iterations.record(iterations, attrs)
    instruments.duration_ms.record(duration_ms, attrs)


def record_precoder_run(method: str) -> None:
    _instruments().precoder_runs.add(1, {"method": method})


# ── Span 辅助 ──


@contextmanager
def trace_span(tracer: trace.Tracer, name: str, attributes: Optional[dict] = None):
    """start_as_current_span 的包装，异常向上抛出前写入 span 状态。"""
    with tracer.start_as_current_span(name, attributes=attributes) as span:
        try:
            yield span
        except Exception as e:
            span.set_status(StatusCode.ERROR, str(e))
            span.record_exception(e)
            raise

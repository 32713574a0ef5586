"""OTel 辅助：默认关闭时的 no-op 行为。"""

from concurrent.futures import ThreadPoolExecutor

import pytest

from src.observability import get_tracer, init_telemetry, parse_headers, shutdown_telemetry
from src.observability.instruments import propagate_context, record_precoder_run, record_solver_metrics, trace_span


def test_parse_headers():
    assert parse_headers("") == {}
    assert parse_headers("Authorization=Bearer a=b, x-team = ce ,broken") == {
        "authorization": "Bearer a=b",
        "x-team": "ce",
    }


def test_disabled_lifecycle_is_idempotent():
    init_telemetry()
    init_telemetry()
    record_solver_metrics(method="pg", iterations=3, duration_ms=1.0, stop_reason="tolerance")
    record_precoder_run("pg")
    shutdown_telemetry()
    shutdown_telemetry()


def test_trace_span_reraises():
    tracer = get_tracer(__name__)
    with pytest.raises(ValueError, match="boom"):
        with trace_span(tracer, "test.span", {"k": 1}):
            raise ValueError("boom")


def test_propagate_context_keeps_function():
    def square(x):
        return x * x

    wrapped = propagate_context(square)
    assert wrapped.__name__ == "square"
    with ThreadPoolExecutor(max_workers=2) as pool:
        assert list(pool.map(wrapped, [1, 2, 3])) == [1, 4, 9]

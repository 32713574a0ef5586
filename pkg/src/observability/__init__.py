"""OpenTelemetry 追踪与指标。

OTEL_ENABLED=false（默认）时不安装任何 provider，get_tracer / get_meter 返回 no-op 实现，
求解器和扫描中的 span 与指标记录没有额外开销。

命令行在一次运行的首尾调用：
    init_telemetry()
    ...
    shutdown_telemetry()   # 批处理进程很短，退出前强制 flush
"""

import importlib
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from opentelemetry import metrics, trace

from src.config import settings
from src.config.settings import OtelSettings
from src.utils.logger import logger

# 协议 → (exporter 包, 是否需要为每种信号追加路径)
_OTLP_PROTOCOLS: Dict[str, Tuple[str, bool]] = {
    "grpc": ("opentelemetry.exporter.otlp.proto.grpc", False),
    "http": ("opentelemetry.exporter.otlp.proto.http", True),
}

# 扫描可能持续数分钟，按此间隔周期导出指标
METRIC_EXPORT_INTERVAL_MS = 30_000


@dataclass
class _TelemetryState:
    initialized: bool = False
    tracer_provider: Optional[Any] = None
    meter_provider: Optional[Any] = None


_state = _TelemetryState()


def parse_headers(raw: str) -> Dict[str, str]:
    """"k1=v1,k2=v2" → dict，键转小写；值中的 '=' 保留（只按第一个 '=' 切分）。"""
    pairs = (item.split("=", 1) for item in raw.split(",") if "=" in item)
    return {k.strip().lower(): v.strip() for k, v in pairs if k.strip()}


def _otlp_exporters(conf: OtelSettings) -> Tuple[Any, Any]:
    """按协议构造 (span_exporter, metric_exporter)。

    Raises:
        ValueError: 不支持的协议。
    """
    protocol = conf.exporter_protocol.lower()
    if protocol not in _OTLP_PROTOCOLS:
        raise ValueError(f"不支持的 OTEL_EXPORTER_PROTOCOL: '{protocol}'，可选: {sorted(_OTLP_PROTOCOLS)}")
    package, per_signal_path = _OTLP_PROTOCOLS[protocol]

    endpoint = conf.exporter_endpoint.rstrip("/")
    common: Dict[str, Any] = {}
    if headers := parse_headers(conf.exporter_headers):
        common["headers"] = headers
    if protocol == "grpc":
        common["insecure"] = not endpoint.startswith("https://")

    def endpoint_for(signal: str) -> str:
        return f"{endpoint}/v1/{signal}" if per_signal_path else endpoint

    span_mod = importlib.import_module(f"{package}.trace_exporter")
    metric_mod = importlib.import_module(f"{package}.metric_exporter")
    return (
        span_mod.OTLPSpanExporter(endpoint=endpoint_for("traces"), **common),
        metric_mod.OTLPMetricExporter(endpoint=endpoint_for("metrics"), **common),
    )


def init_telemetry() -> None:
    """安装 SDK provider；重复调用无副作用。

    OTEL_CONSOLE_EXPORT=true 时导出到控制台，否则走 OTLP，OTLP 初始化失败回退到控制台。
    """
    if _state.initialized:
        return
    _state.initialized = True

    conf = settings.otel
    if not conf.enabled:
        logger.debug("OpenTelemetry 未启用 (OTEL_ENABLED=false)")
        return

    from opentelemetry.sdk.metrics import MeterProvider
    from opentelemetry.sdk.metrics.export import ConsoleMetricExporter, PeriodicExportingMetricReader
    from opentelemetry.sdk.resources import SERVICE_NAME, Resource
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter

    span_exporter, metric_exporter = ConsoleSpanExporter(), ConsoleMetricExporter()
    target = "console"
    if not conf.console_export:
        try:
            span_exporter, metric_exporter = _otlp_exporters(conf)
            target = f"otlp/{conf.exporter_protocol} -> {conf.exporter_endpoint}"
        except Exception as e:
            logger.warning("OTLP exporter 初始化失败，回退到控制台输出 | err={}", e)

    resource = Resource.create({SERVICE_NAME: conf.service_name})
    _state.tracer_provider = TracerProvider(resource=resource)
    _state.tracer_provider.add_span_processor(BatchSpanProcessor(span_exporter))
    trace.set_tracer_provider(_state.tracer_provider)

    reader = PeriodicExportingMetricReader(metric_exporter, export_interval_millis=METRIC_EXPORT_INTERVAL_MS)
    _state.meter_provider = MeterProvider(resource=resource, metric_readers=[reader])
    metrics.set_meter_provider(_state.meter_provider)

    logger.info("OpenTelemetry 已启用 | service={} | exporter={}", conf.service_name, target)


def shutdown_telemetry() -> None:
    """flush 并关闭 provider。"""
    for provider in (_state.tracer_provider, _state.meter_provider):
        if provider is None:
            continue
        try:
            provider.shutdown()
        except Exception as e:
            logger.warning("OTel provider 关闭异常 | err={}", e)
    _state.tracer_provider = None
    _state.meter_provider = None


def get_tracer(name: str) -> trace.Tracer:
    return trace.get_tracer(name)


def get_meter(name: str) -> metrics.Meter:
    return metrics.get_meter(name)

"""运行时配置管理模块，基于 pydantic-settings 实现类型安全的配置加载。

每个子配置类独立读取 .env 文件，通过 env_prefix 区分不同配置组。
实验本身的参数（天线数、SNR 列表、求解器参数等）不在这里，见 src.config.schemas。
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class LogSettings(BaseSettings):
    """日志配置。

    环境变量前缀: LOG_
    - LOG_LEVEL: 控制台日志级别（默认 INFO）
    - LOG_FILE_ENABLED: 是否写入按日轮转的日志文件（默认 false）
    - LOG_DIR: 日志目录
    - LOG_RETENTION: 日志文件保留时长
    """

    level: str = "INFO"
    file_enabled: bool = False
    dir: str = "logs"
    retention: str = "7 days"

    model_config: SettingsConfigDict = SettingsConfigDict(
        env_prefix="LOG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class RuntimeSettings(BaseSettings):
    """Monte-Carlo 运行时配置。

    环境变量前缀: RUNTIME_
    - RUNTIME_WORKERS: 默认并发 worker 数（命令行 --workers 优先）
    - RUNTIME_TRIAL_BATCH: 噪声样本向量化批大小，控制 estimate_ber 的峰值内存
    - RUNTIME_OUTPUT_DIR: 未指定 --out 时 CSV 的输出目录
    """

    workers: int = 1
    trial_batch: int = 20_000
    output_dir: str = "results"

    model_config: SettingsConfigDict = SettingsConfigDict(
        env_prefix="RUNTIME_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class OtelSettings(BaseSettings):
    """求解与扫描的 span / 指标导出（OTEL_ 前缀）。

    默认关闭，此时 span 与指标调用全部是 no-op。enabled=true 后：
    console_export=true 输出到 stderr；否则按 exporter_protocol（grpc | http）
    发送到 exporter_endpoint，exporter_headers 为 "k=v,k2=v2" 形式的鉴权头。
    """

    enabled: bool = False
    service_name: str = "ce-precoding"
    exporter_protocol: str = "grpc"
    exporter_endpoint: str = "http://localhost:4317"
    exporter_headers: str = ""
    console_export: bool = False

    model_config: SettingsConfigDict = SettingsConfigDict(
        env_prefix="OTEL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class Settings:
    """全局配置聚合，各子配置独立加载 .env。"""

    def __init__(self) -> None:
        self.log: LogSettings = LogSettings()
        self.runtime: RuntimeSettings = RuntimeSettings()
        self.otel: OtelSettings = OtelSettings()
        self._validate_cross_config()

    def _validate_cross_config(self) -> None:
        """跨配置组的一致性校验。"""
        if self.runtime.workers < 1 or self.runtime.trial_batch < 1:
            import warnings
            warnings.warn(
                f"RUNTIME_WORKERS({self.runtime.workers}) 与 RUNTIME_TRIAL_BATCH"
                + f"({self.runtime.trial_batch}) 必须为正整数，已回退为 1。",
                stacklevel=2,
            )
            self.runtime.workers = max(1, self.runtime.workers)
            self.runtime.trial_batch = max(1, self.runtime.trial_batch)


settings = Settings()

"""日志配置模块。

输出：
- 控制台（stderr）：默认 INFO 级别（LOG_LEVEL），带颜色
- 文件（logs/ce_precoding_{date}.log）：DEBUG 级别，按日轮转，LOG_FILE_ENABLED=true 时启用

命令行 -v / -q 通过 set_level() 调整控制台级别。
"""

import sys
from pathlib import Path

from loguru import logger

from src.config.settings import settings

_CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)

# 移除默认 handler
logger.remove()

_console_sink_id = logger.add(
    sys.stderr,
    level=settings.log.level,
    format=_CONSOLE_FORMAT,
    colorize=True,
)

if settings.log.file_enabled:
    _LOG_DIR = Path(settings.log.dir)
    _LOG_DIR.mkdir(parents=True, exist_ok=True)
    logger.add(
        str(_LOG_DIR / "ce_precoding_{time:YYYY-MM-DD}.log"),
        level="DEBUG",
        format=(
            "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
            "{level: <8} | "
            "{name}:{function}:{line} - "
            "{message}"
        ),
        rotation="00:00",
        retention=settings.log.retention,
        encoding="utf-8",
        enqueue=True,  # 线程安全：Monte-Carlo worker 并发写日志
    )


def set_level(level: str) -> None:
    """替换控制台 sink 的日志级别。"""
    global _console_sink_id
    logger.remove(_console_sink_id)
    _console_sink_id = logger.add(
        sys.stderr,
        level=level.upper(),
        format=_CONSOLE_FORMAT,
        colorize=True,
    )


__all__ = ["logger", "set_level"]

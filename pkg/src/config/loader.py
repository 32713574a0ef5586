"""扁平配置文件加载。

语法：
    # 注释
    N = 64
    K = 8
    snr_db = 20, 25, 30
    methods = zf, ce-zf, mui-min, pg, fpg
    sigma = 0.05              # 求解器字段可直接写
    solver.max_iters = 5000   # 或带 solver. 前缀

优先级：模型默认值 < 配置文件 < 命令行覆盖。未知键直接报错（带行号）。
"""

import io
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv.parser import parse_stream

from src.config.schemas import (
    ExperimentConfig,
    SolverConfig,
    build_experiment_config,
)
from src.errors import ConfigurationError
from src.utils.logger import logger

_LIST_KEYS = frozenset({"snr_db", "methods"})
_EXPERIMENT_KEYS = frozenset(ExperimentConfig.model_fields) - {"solver"}
_SOLVER_KEYS = frozenset(SolverConfig.model_fields)


def parse_config_text(text: str, source: str = "<string>") -> Dict[str, Any]:
    """解析配置文本，返回 {"solver": {...}, 其他实验字段...} 形式的嵌套字典。

    逐行语法由 python-dotenv 解析（key = value，# 注释，值可加引号）；
    值保持字符串（列表键拆分为字符串列表），类型转换交给 pydantic。
    """
    values: Dict[str, Any] = {}
    solver: Dict[str, Any] = {}

    for binding in parse_stream(io.StringIO(text)):
        lineno = binding.original.line
        line = binding.original.string.strip()
        if binding.error:
            raise ConfigurationError(f"{source}:{lineno}: 语法错误（缺少 '=' 或引号不匹配）：{line!r}")
        key = binding.key
        if key is None:
            continue
        if binding.value is None:
            raise ConfigurationError(f"{source}:{lineno}: 缺少 '='：{line!r}")

        if key.startswith("solver."):
            target, field = solver, key[len("solver."):]
            if field not in _SOLVER_KEYS:
                raise ConfigurationError(f"{source}:{lineno}: 未知求解器配置项 {key!r}")
        elif key in _EXPERIMENT_KEYS:
            target, field = values, key
        elif key in _SOLVER_KEYS:
            target, field = solver, key
        else:
            raise ConfigurationError(f"{source}:{lineno}: 未知配置项 {key!r}")

        if field in target:
            logger.warning("{}:{}: 键 {} 重复定义，后者覆盖前者", source, lineno, key)
        value = binding.value.strip()
        target[field] = _split_list(value) if field in _LIST_KEYS else value

    if solver:
        values["solver"] = solver
    return values


def _split_list(value: str) -> list:
    return [item.strip() for item in value.split(",") if item.strip()]


def merge_overrides(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """合并命令行覆盖项（值为 None 的项忽略），solver 子字典逐键合并。"""
    merged: Dict[str, Any] = {k: v for k, v in base.items() if k != "solver"}
    solver: Dict[str, Any] = dict(base.get("solver", {}))

    for key, value in overrides.items():
        if value is None:
            continue
        if key == "solver":
            solver.update({k: v for k, v in value.items() if v is not None})
        elif key in _SOLVER_KEYS and key not in _EXPERIMENT_KEYS:
            solver[key] = value
        elif key in _EXPERIMENT_KEYS:
            merged[key] = value
        else:
            raise ConfigurationError(f"未知配置项: {key}")

    if solver:
        merged["solver"] = solver
    return merged


def load_config_file(path: Path) -> Dict[str, Any]:
    """读取配置文件为原始字典。

    Raises:
        ConfigurationError: 文件不存在、不可读或存在语法/未知键错误。
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"配置文件不存在: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"配置文件读取失败: {path} ({e})") from e
    return parse_config_text(text, source=str(path))


def load_experiment_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """按优先级 默认值 < 文件 < 覆盖项 构造 ExperimentConfig。"""
    raw: Dict[str, Any] = load_config_file(path) if path is not None else {}
    if overrides:
        raw = merge_overrides(raw, overrides)
    config = build_experiment_config(raw)
    logger.debug(
        "实验配置已加载 | source={} | N={} K={} T={} L={} | methods={} | snr={}",
        path or "<defaults>", config.N, config.K, config.T, config.L,
        config.method_names, config.snr_db,
    )
    return config

from src.precoders.base import BasePrecoder, PrecoderRegistry, TimedResult
from src.precoders.baselines import (
    MuiObjective,
    PrecodeResult,
    ce_zf_precode,
    mui_min_precode,
    solver_result,
    zf_precode,
)
from src.precoders.methods import (
    CeZfPrecoder,
    FpgPrecoder,
    MuiMinPrecoder,
    PgPrecoder,
    ZfPrecoder,
    build_registry,
)

__all__ = [
    "BasePrecoder",
    "PrecoderRegistry",
    "TimedResult",
    "MuiObjective",
    "PrecodeResult",
    "ce_zf_precode",
    "mui_min_precode",
    "solver_result",
    "zf_precode",
    "CeZfPrecoder",
    "FpgPrecoder",
    "MuiMinPrecoder",
    "PgPrecoder",
    "ZfPrecoder",
    "build_registry",
]

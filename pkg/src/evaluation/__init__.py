from src.evaluation.checks import (
    CheckResult,
    CheckSuiteReport,
    check_gradient,
    check_projection,
    check_sandwich,
    check_ser_bound,
    run_checks,
)
from src.evaluation.metrics import (
    BerEstimate,
    SerBound,
    estimate_ber,
    papr,
    q_function,
    ser_upper_bound,
)

__all__ = [
    "CheckResult",
    "CheckSuiteReport",
    "check_gradient",
    "check_projection",
    "check_sandwich",
    "check_ser_bound",
    "run_checks",
    "BerEstimate",
    "SerBound",
    "estimate_ber",
    "papr",
    "q_function",
    "ser_upper_bound",
]

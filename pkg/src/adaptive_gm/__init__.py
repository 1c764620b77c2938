"""Adaptive step-size and momentum selection for GD, NAG and heavy ball."""

from .linalg import (
    ContractViolation,
    DenseOperator,
    DiagonalOperator,
    Spectrum,
    apply,
    norm2,
    residual,
)
from .optimizers import (
    AdaptiveSchedule,
    DivergenceError,
    EstimatedSchedule,
    FixedSchedule,
    Method,
    OptimizerState,
    RunConfig,
    Trace,
    TraceRecord,
    gd_param_rule,
    hb_param_rule,
    nag_param_rule,
    optimal_params,
    rate_bound,
    run,
    step_gd,
    step_hb,
    step_nag,
)
from .rates import NotReadyError, RateEstimator, stacked_norm

__version__ = "0.1.0"

"""GD, Nesterov (NAG) and heavy-ball (HB) iterations.

Two ways of choosing parameters are supported:

* fixed ``(alpha, beta)`` -- usually the classical optimal pair from
  :func:`optimal_params`;
* adaptive -- after every step a :class:`~adaptive_gm.rates.RateEstimator`
  produces ``rho``, and the method's parameter rule turns ``rho`` into the
  next ``(alpha, beta)`` by inverting the optimal-rate formula for ``mu``.

Objectives are duck-typed: anything with ``value(x)`` and ``grad(x)``.
Residuals are always ``r = -grad f(x)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .linalg import ContractViolation, as_vector, norm2
from .rates import DEFAULT_CEILING, RateEstimator, parse_window, stacked_norm

DIVERGENCE_FACTOR = 1e12


class Method(str, enum.Enum):
    GD = "GD"
    NAG = "NAG"
    HB = "HB"

    @property
    def has_momentum(self) -> bool:
        return self is not Method.GD


class DivergenceError(RuntimeError):
    """A run produced a non-finite iterate or an exploding gradient.

    ``trace`` holds every row recorded before the failure.
    """

    def __init__(self, message: str, trace: "Trace"):
        super().__init__(message)
        self.trace = trace


def _check_mu_L(mu: float, L: float) -> None:
    if not (mu > 0.0 and L >= mu and math.isfinite(L)):
        raise ContractViolation(f"need 0 < mu <= L, got mu={mu}, L={L}")


def optimal_params(method, mu: float, L: float) -> tuple[float, float]:
    """Classical optimal ``(alpha, beta)`` for a quadratic with spectrum in [mu, L]."""
    method = Method(method)
    _check_mu_L(mu, L)
    if method is Method.GD:
        return 2.0 / (L + mu), 0.0
    sL, smu = math.sqrt(L), math.sqrt(mu)
    q = (sL - smu) / (sL + smu)
    if method is Method.NAG:
        return 1.0 / L, q
    return 4.0 / (sL + smu) ** 2, q * q


def rate_bound(method, mu: float, L: float) -> float:
    """Worst-case contraction factor attained by :func:`optimal_params`."""
    method = Method(method)
    _check_mu_L(mu, L)
    if method is Method.GD:
        return (L - mu) / (L + mu)
    if method is Method.NAG:
        return 1.0 - math.sqrt(mu / L)
    sL, smu = math.sqrt(L), math.sqrt(mu)
    return (sL - smu) / (sL + smu)


def _check_rule_args(rho: float, L_tilde: float) -> None:
    if not 0.0 <= rho < 1.0:
        raise ContractViolation(f"rho must lie in [0, 1), got {rho}")
    if not L_tilde > 0.0:
        raise ContractViolation(f"L_tilde must be positive, got {L_tilde}")


def implied_mu(method, rho: float, L_tilde: float = 1.0) -> float:
    """Strong-convexity estimate obtained by inverting the method's rate bound."""
    method = Method(method)
    _check_rule_args(rho, L_tilde)
    if method is Method.GD:
        return L_tilde * (1.0 - rho) / (1.0 + rho)
    if method is Method.NAG:
        return L_tilde * (1.0 - rho) ** 2
    return L_tilde * ((1.0 - rho) / (1.0 + rho)) ** 2


# The closed forms below are the optimal-parameter formulas evaluated at
# (implied_mu, L_tilde); sqrt(L_tilde) cancels, leaving exact expressions.

def gd_param_rule(rho: float, L_tilde: float = 1.0) -> float:
    _check_rule_args(rho, L_tilde)
    return (1.0 + rho) / L_tilde


def nag_param_rule(rho: float, L_tilde: float = 1.0) -> tuple[float, float]:
    _check_rule_args(rho, L_tilde)
    return 1.0 / L_tilde, rho / (2.0 - rho)


def hb_param_rule(rho: float, L_tilde: float = 1.0) -> tuple[float, float]:
    _check_rule_args(rho, L_tilde)
    return (1.0 + rho) ** 2 / L_tilde, rho * rho


def param_rule(method, rho: float, L_tilde: float = 1.0) -> tuple[float, float]:
    method = Method(method)
    if method is Method.GD:
        return gd_param_rule(rho, L_tilde), 0.0
    if method is Method.NAG:
        return nag_param_rule(rho, L_tilde)
    return hb_param_rule(rho, L_tilde)


@dataclass(frozen=True)
class OptimizerState:
    x: np.ndarray
    x_prev: np.ndarray
    r: np.ndarray
    k: int = 0

    @classmethod
    def start(cls, objective, x0) -> "OptimizerState":
        x0 = as_vector(x0, "x0").copy()
        return cls(x=x0, x_prev=x0, r=-objective.grad(x0), k=0)


def _advance(state: OptimizerState, objective, x_new: np.ndarray) -> OptimizerState:
    return OptimizerState(x=x_new, x_prev=state.x, r=-objective.grad(x_new), k=state.k + 1)


def step_gd(state: OptimizerState, objective, alpha: float) -> OptimizerState:
    if not alpha > 0.0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    return _advance(state, objective, state.x + alpha * state.r)


def step_nag(state: OptimizerState, objective, alpha: float, beta: float) -> OptimizerState:
    if not alpha > 0.0 or beta < 0.0:
        raise ContractViolation(f"need alpha > 0 and beta >= 0, got {alpha}, {beta}")
    if beta == 0.0:
        return step_gd(state, objective, alpha)
    y = state.x + beta * (state.x - state.x_prev)
    return _advance(state, objective, y - alpha * objective.grad(y))


def step_hb(state: OptimizerState, objective, alpha: float, beta: float) -> OptimizerState:
    if not alpha > 0.0 or beta < 0.0:
        raise ContractViolation(f"need alpha > 0 and beta >= 0, got {alpha}, {beta}")
    if beta == 0.0:
        return step_gd(state, objective, alpha)
    return _advance(state, objective, state.x + alpha * state.r + beta * (state.x - state.x_prev))


def step(method, state: OptimizerState, objective, alpha: float, beta: float = 0.0) -> OptimizerState:
    method = Method(method)
    if method is Method.GD:
        return step_gd(state, objective, alpha)
    if method is Method.NAG:
        return step_nag(state, objective, alpha, beta)
    return step_hb(state, objective, alpha, beta)


@dataclass(frozen=True)
class FixedSchedule:
    """Constant ``(alpha, beta)``.

    ``warmup_alpha`` makes the first iteration of a momentum method a plain
    GD step with that step size; ``monitor_window`` is the window of the
    rate estimator that is run purely for reporting.
    """

    alpha: float
    beta: float = 0.0
    warmup_alpha: Optional[float] = None
    monitor_window: object = 1


@dataclass(frozen=True)
class AdaptiveSchedule:
    """Parameters recomputed from the rate estimate after every step.

    The first iteration is a GD step with ``warmup_alpha`` (default
    ``1 / L_tilde``).
    """

    window: object = 1
    L_tilde: float = 1.0
    warmup_alpha: Optional[float] = None
    clamp_ceiling: float = DEFAULT_CEILING

    def __post_init__(self):
        parse_window(self.window)
        if not self.L_tilde > 0.0:
            raise ContractViolation("L_tilde must be positive")

    @property
    def first_alpha(self) -> float:
        return self.warmup_alpha if self.warmup_alpha is not None else 1.0 / self.L_tilde


@dataclass(frozen=True)
class EstimatedSchedule:
    """Parameters from a callback evaluated at the current iterate.

    Used for baselines whose ``(mu, L)`` are re-estimated numerically during
    the run (e.g. by shifted power iteration on the local Hessian).
    """

    params: Callable[[np.ndarray], tuple[float, float]]
    warmup_alpha: Optional[float] = None
    monitor_window: object = 1


class RunConfig(NamedTuple):
    max_iterations: int
    tolerance: float
    tolerance_mode: str = "absolute"

    def validate(self) -> None:
        if self.max_iterations < 1 or not self.tolerance > 0.0:
            raise ContractViolation("max_iterations and tolerance must be positive")
        if self.tolerance_mode not in ("absolute", "relative"):
            raise ContractViolation(f"unknown tolerance_mode {self.tolerance_mode!r}")


class TraceRecord(NamedTuple):
    iteration: int
    solution_error: Optional[float]
    function_error: Optional[float]
    grad_norm: float
    rho_est: Optional[float]
    alpha: Optional[float]
    beta: Optional[float]


@dataclass
class Trace:
    rows: list = field(default_factory=list)
    stop_reason: Optional[str] = None
    x_final: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return self.rows[-1].iteration if self.rows else 0

    @property
    def last(self) -> TraceRecord:
        return self.rows[-1]


def run(method, schedule, objective, x0, config: RunConfig, x_star=None) -> Trace:
    """Iterate ``method`` under ``schedule`` until the gradient test or ``max_iterations``.

    Row ``k`` of the returned trace describes ``x_k``; its ``alpha``/``beta``
    are the parameters of the step that produced ``x_k`` and ``rho_est`` is
    the rate estimate available after that step.
    """
    method = Method(method)
    config = RunConfig(*config)
    config.validate()
    state = OptimizerState.start(objective, x0)

    if x_star is not None:
        x_star = as_vector(x_star, "x_star")
        f_star = float(objective.value(x_star))

    def record(st: OptimizerState, gnorm, rho, alpha, beta) -> TraceRecord:
        if x_star is None:
            sol = fun = None
        else:
            sol = norm2(st.x - x_star)
            fun = float(objective.value(st.x)) - f_star
        return TraceRecord(st.k, sol, fun, gnorm, rho, alpha, beta)

    g0 = norm2(state.r)
    trace = Trace(rows=[record(state, g0, None, None, None)], x_final=state.x)
    if not math.isfinite(g0):
        raise DivergenceError("gradient is not finite at the starting point", trace)

    def small(gnorm: float) -> bool:
        if config.tolerance_mode == "relative":
            return g0 == 0.0 or gnorm / g0 < config.tolerance
        return gnorm < config.tolerance

    if small(g0):
        trace.stop_reason = "tolerance"
        return trace

    adaptive = isinstance(schedule, AdaptiveSchedule)
    if adaptive:
        estimator = RateEstimator(schedule.window, schedule.clamp_ceiling)
    else:
        estimator = RateEstimator(schedule.monitor_window)
    if not method.has_momentum:
        estimator.push_norm(g0)

    rho = None
    for k in range(1, config.max_iterations + 1):
        r_prev = state.r
        alpha, beta = _next_params(method, schedule, state, rho, k)
        state = step(method, state, objective, alpha, beta)
        gnorm = norm2(state.r)

        if method.has_momentum:
            if k == 1:
                estimator.push_norm(stacked_norm(state.r, r_prev))
                rho = min(gnorm / g0, estimator.clamp_ceiling)
            else:
                estimator.push_norm(stacked_norm(state.r, r_prev))
                rho = estimator.current_rate()
        else:
            estimator.push_norm(gnorm)
            rho = estimator.current_rate()

        trace.rows.append(record(state, gnorm, rho, alpha, beta))
        if not (math.isfinite(gnorm) and np.all(np.isfinite(state.x))):
            raise DivergenceError(f"non-finite iterate at iteration {k}", trace)
        trace.x_final = state.x
        if gnorm > DIVERGENCE_FACTOR * g0:
            raise DivergenceError(f"gradient norm exploded at iteration {k}", trace)
        if small(gnorm):
            trace.stop_reason = "tolerance"
            return trace

    trace.stop_reason = "max_iterations"
    return trace


def _next_params(method: Method, schedule, state: OptimizerState, rho, k: int) -> tuple[float, float]:
    if isinstance(schedule, AdaptiveSchedule):
        if k == 1:
            return schedule.first_alpha, 0.0
        return param_rule(method, rho, schedule.L_tilde)
    if k == 1 and method.has_momentum and schedule.warmup_alpha is not None:
        return schedule.warmup_alpha, 0.0
    if isinstance(schedule, FixedSchedule):
        return schedule.alpha, (schedule.beta if method.has_momentum else 0.0)
    alpha, beta = schedule.params(state.x)
    return float(alpha), (float(beta) if method.has_momentum else 0.0)

"""Regularization parameter choice.

Three rules are implemented. The residual-matching rule solves
``data_residual(alpha) = tau * delta`` by bisection on the logarithm of
alpha, relying on the monotone growth of the residual for linear models
and falling back to a geometric scan when a nonlinear residual refuses to
bracket. The sequential rule walks alpha_0 * gamma^j downward and keeps
the first (hence largest) grid point whose residual is at or under
tau * delta. The a priori rule is plain arithmetic, included so rate
experiments have a non-data-driven comparator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    HypothesisViolationError,
    InvalidInputError,
    NonconvergenceError,
    NoSolutionError,
)
from .models import ForwardModel, NoisyObservation
from .tikhonov import TikhonovResult, solve_nonlinear

__all__ = [
    "SelectorConfig",
    "SelectionResult",
    "AlphaFloorCheck",
    "discrepancy_select",
    "sequential_select",
    "apriori_select",
    "select_alpha",
    "alpha_lower_bound_check",
]


@dataclass(frozen=True)
class SelectorConfig:
    """Knobs shared by the selection rules.

    tau is the overshoot factor on the noise level (at least 1; the
    sequential rule needs it strictly above 1). gamma and alpha0 define
    the sequential grid. The bracket, tolerance, and iteration caps steer
    the residual-matching root search. ``fallback_ratio`` is the step of
    the scan used when a nonlinear residual cannot be bracketed.
    """

    tau: float = 1.5
    gamma: float = 0.5
    alpha0: float = 1.0
    alpha_min: float = 1e-14
    alpha_max: float = 1e6
    root_tolerance: float = 1e-6
    max_bisections: int = 200
    grid_cap: int = 200
    fallback_ratio: float = 0.8
    apriori_exponent: float = 2.0 / 3.0
    apriori_constant: float = 1.0
    multistart: int = 0
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 1.0:
            raise HypothesisViolationError(f"tau must be at least 1, got {self.tau}")
        if not (0.0 < self.gamma < 1.0):
            raise InvalidInputError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not np.isfinite(self.alpha0) or self.alpha0 <= 0:
            raise InvalidInputError("alpha0 must be positive")
        if not (0.0 < self.alpha_min < self.alpha_max):
            raise InvalidInputError("need 0 < alpha_min < alpha_max")
        if not np.isfinite(self.root_tolerance) or self.root_tolerance <= 0:
            raise InvalidInputError("root tolerance must be positive")
        if int(self.max_bisections) < 1 or int(self.grid_cap) < 1:
            raise InvalidInputError("iteration caps must be at least 1")
        if not (0.0 < self.fallback_ratio < 1.0):
            raise InvalidInputError("fallback ratio must lie in (0, 1)")
        if not (0.0 < self.apriori_exponent <= 2.0):
            raise InvalidInputError("a priori exponent must lie in (0, 2]")
        if not np.isfinite(self.apriori_constant) or self.apriori_constant <= 0:
            raise InvalidInputError("a priori constant must be positive")
        if int(self.multistart) < 0:
            raise InvalidInputError("multistart count must be nonnegative")


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Selected parameter, the solve at it, and the search cost."""

    alpha: float
    solution: TikhonovResult
    rule: str
    evaluations: int


class _WarmSolver:
    """Counts solves and warm-starts each from the last converged one."""

    def __init__(self, model, y, x_prior, cfg):
        self.model = model
        self.y = y
        self.x_prior = x_prior
        self.cfg = cfg
        self.evaluations = 0
        self._warm = None

    def solve(self, alpha: float) -> TikhonovResult:
        result = solve_nonlinear(
            self.model,
            alpha,
            self.y,
            self.x_prior,
            x_init=self._warm,
            multistart=self.cfg.multistart,
            seed=(self.cfg.seed, self.evaluations),
        )
        self.evaluations += 1
        if result.converged:
            self._warm = result.x
        return result


def _check_observation(observation: NoisyObservation) -> float:
    delta = observation.delta
    if delta <= 0:
        raise InvalidInputError("selection rules need a positive noise level")
    return delta


def discrepancy_select(
    model: ForwardModel,
    observation: NoisyObservation,
    x_prior,
    cfg: SelectorConfig,
) -> SelectionResult:
    """Match the data residual to tau * delta.

    Raises a no-solution error when the residual ceiling (its value at the
    prior, the large-parameter limit) sits below the target, which is the
    data regime where this rule is simply inapplicable. On models with a
    varying derivative a failed bracket degrades to a geometric scan that
    keeps the largest parameter with residual at or under the target; the
    result is then tagged ``discrepancy-scan``.
    """
    delta = _check_observation(observation)
    target = cfg.tau * delta
    x_prior = model._check_point(x_prior)
    solver = _WarmSolver(model, observation.y_noisy, x_prior, cfg)

    ceiling = float(np.linalg.norm(model.apply(x_prior) - observation.y_noisy))
    if ceiling < target * (1.0 - cfg.root_tolerance):
        raise NoSolutionError(
            f"residual ceiling {ceiling:.6g} is below the target {target:.6g}; "
            "the discrepancy equation has no solution for this data"
        )

    tol = cfg.root_tolerance * target

    hi = cfg.alpha_max
    res_hi = solver.solve(hi)
    while res_hi.data_residual < target - tol and hi < cfg.alpha_max * 1e4:
        hi *= 10.0
        res_hi = solver.solve(hi)

    lo = cfg.alpha_min
    res_lo = solver.solve(lo)
    while res_lo.data_residual > target + tol and lo > cfg.alpha_min * 1e-6:
        lo *= 0.1
        res_lo = solver.solve(lo)

    if abs(res_hi.data_residual - target) <= tol:
        return SelectionResult(hi, res_hi, "discrepancy", solver.evaluations)
    if abs(res_lo.data_residual - target) <= tol:
        return SelectionResult(lo, res_lo, "discrepancy", solver.evaluations)

    if res_hi.data_residual < target or res_lo.data_residual > target:
        # no bracket: residual never reaches the target from one side
        if model.has_constant_derivative:
            raise NoSolutionError(
                f"could not bracket the target residual {target:.6g} within "
                f"[{lo:.3g}, {hi:.3g}]"
            )
        return _fallback_scan(solver, hi, target, cfg)

    for _ in range(int(cfg.max_bisections)):
        mid = math.sqrt(lo * hi)
        res_mid = solver.solve(mid)
        if abs(res_mid.data_residual - target) <= tol:
            return SelectionResult(mid, res_mid, "discrepancy", solver.evaluations)
        if res_mid.data_residual < target:
            lo, res_lo = mid, res_mid
        else:
            hi, res_hi = mid, res_mid
        if hi <= lo * (1.0 + 1e-15):
            break

    if not model.has_constant_derivative:
        return _fallback_scan(solver, hi, target, cfg)
    raise NonconvergenceError(
        f"bisection exhausted without matching the residual target {target:.6g}"
    )


def _fallback_scan(solver: _WarmSolver, start: float, target: float, cfg: SelectorConfig) -> SelectionResult:
    alpha = start
    for _ in range(int(cfg.grid_cap)):
        result = solver.solve(alpha)
        if result.data_residual <= target:
            return SelectionResult(alpha, result, "discrepancy-scan", solver.evaluations)
        alpha *= cfg.fallback_ratio
    raise NoSolutionError(
        f"geometric scan found no parameter with residual at or under {target:.6g}"
    )


def sequential_select(
    model: ForwardModel,
    observation: NoisyObservation,
    x_prior,
    cfg: SelectorConfig,
) -> SelectionResult:
    """Largest alpha0 * gamma^j whose residual is at or under tau * delta."""
    if cfg.tau <= 1.0:
        raise HypothesisViolationError("the sequential rule requires tau strictly above 1")
    delta = _check_observation(observation)
    target = cfg.tau * delta
    x_prior = model._check_point(x_prior)
    solver = _WarmSolver(model, observation.y_noisy, x_prior, cfg)
    alpha = cfg.alpha0
    for _ in range(int(cfg.grid_cap) + 1):
        result = solver.solve(alpha)
        if result.data_residual <= target:
            return SelectionResult(alpha, result, "sequential", solver.evaluations)
        alpha *= cfg.gamma
    raise NonconvergenceError(
        f"no grid point reached residual {target:.6g} within {cfg.grid_cap} steps"
    )


def apriori_select(delta: float, exponent: float, constant: float) -> float:
    """alpha = constant * delta**exponent, the noise-only comparator rule."""
    delta = float(delta)
    if not np.isfinite(delta) or delta <= 0:
        raise InvalidInputError("noise level must be positive")
    exponent = float(exponent)
    if not (0.0 < exponent <= 2.0):
        raise InvalidInputError("exponent must lie in (0, 2]")
    constant = float(constant)
    if not np.isfinite(constant) or constant <= 0:
        raise InvalidInputError("constant must be positive")
    return constant * delta**exponent


def select_alpha(
    rule: str,
    model: ForwardModel,
    observation: NoisyObservation,
    x_prior,
    cfg: SelectorConfig,
) -> SelectionResult:
    """Dispatch on the rule name: discrepancy, sequential, or apriori."""
    if rule == "discrepancy":
        return discrepancy_select(model, observation, x_prior, cfg)
    if rule == "sequential":
        return sequential_select(model, observation, x_prior, cfg)
    if rule == "apriori":
        delta = _check_observation(observation)
        alpha = apriori_select(delta, cfg.apriori_exponent, cfg.apriori_constant)
        result = solve_nonlinear(
            model,
            alpha,
            observation.y_noisy,
            x_prior,
            multistart=cfg.multistart,
            seed=(cfg.seed, 0),
        )
        return SelectionResult(alpha, result, "apriori", 1)
    raise InvalidInputError(f"unknown rule {rule!r}; expected discrepancy, sequential, or apriori")


@dataclass(frozen=True)
class AlphaFloorCheck:
    """Outcome of the selected-parameter floor inequality."""

    passed: bool
    bound: float
    margin: float
    alpha: float
    rule: str


def alpha_lower_bound_check(
    selection: SelectionResult,
    cfg: SelectorConfig,
    norm_u: float,
    delta: float,
) -> AlphaFloorCheck:
    """Check alpha >= (tau - 1) * gamma * delta / (2 * ||u||).

    Valid for selections made by either data-driven rule on an instance
    with a half-order source. The margin is the ratio of the selected
    parameter to the bound (infinite when tau = 1 makes the bound vanish).
    """
    if norm_u is None or norm_u <= 0:
        raise HypothesisViolationError("the floor check needs the source element norm")
    delta = float(delta)
    if delta <= 0:
        raise InvalidInputError("noise level must be positive")
    bound = (cfg.tau - 1.0) * cfg.gamma * delta / (2.0 * float(norm_u))
    margin = selection.alpha / bound if bound > 0 else math.inf
    return AlphaFloorCheck(
        passed=selection.alpha >= bound,
        bound=bound,
        margin=margin,
        alpha=selection.alpha,
        rule=selection.rule,
    )

"""Step-size and query-radius schedules plus the convergence-condition validator.

Both sequences are decaying power laws,

    gamma_k = gamma0 / (k + k_gamma) ** alpha_gamma
    delta_k = delta0 / (k + k_delta) ** alpha_delta,

and the validator checks the exponent inequalities that the convergence
guarantee requires, together with the geometric constraint that the largest
query radius fits inside every player's interior ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScheduleParams:
    gamma0: float = 1.0
    k_gamma: float = 1000.0
    alpha_gamma: float = 0.9
    delta0: float = 1.0
    k_delta: float = 10.0
    alpha_delta: float = 0.6

    def __post_init__(self):
        if not (self.gamma0 > 0.0 and self.delta0 > 0.0):
            raise ValueError("gamma0 and delta0 must be positive")
        if self.k_gamma < 0.0 or self.k_delta < 0.0:
            raise ValueError("offsets k_gamma and k_delta must be nonnegative")
        if not (0.0 < self.alpha_gamma <= 1.0 and 0.0 < self.alpha_delta <= 1.0):
            raise ValueError("exponents must lie in (0, 1]")


def _power_decay(x0: float, offset: float, alpha: float, k):
    # scalar libm pow for every element: numpy's vectorized pow rounds a few
    # values differently, and bit-reproducibility across call styles matters
    # for the determinism contract
    karr = np.asarray(k, dtype=float)
    if karr.ndim == 0:
        return x0 / float(karr + offset) ** alpha
    flat = np.array([x0 / float(v + offset) ** alpha for v in karr.ravel()])
    return flat.reshape(karr.shape)


def step_size(params: ScheduleParams, k) -> float | np.ndarray:
    """gamma_k; accepts scalar or array iteration indices (k >= 1)."""
    return _power_decay(params.gamma0, params.k_gamma, params.alpha_gamma, k)


def query_radius(params: ScheduleParams, k) -> float | np.ndarray:
    """delta_k; accepts scalar or array iteration indices (k >= 1)."""
    return _power_decay(params.delta0, params.k_delta, params.alpha_delta, k)


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return "\n".join(lines)


def validate_params(params: ScheduleParams, delay_alpha: float = 0.0,
                    min_ball_radius: float | None = None) -> ValidationReport:
    """Check the exponent conditions the convergence guarantee requires.

    Advisory by default: the report names each violated inequality and the
    caller decides whether to abort (strict mode). ``min_ball_radius``, when
    given, additionally enforces that delta_1 fits inside the smallest
    interior ball.
    """
    ag, ad_, axp = params.alpha_gamma, params.alpha_delta, float(delay_alpha)
    checks = [
        ConditionCheck(
            "alpha_gamma_range", 0.5 < ag <= 1.0,
            f"0.5 < alpha_gamma <= 1 with alpha_gamma={ag}"),
        ConditionCheck(
            "alpha_gamma_gt_alpha_delta", ag > ad_,
            f"alpha_gamma > alpha_delta with alpha_gamma={ag}, alpha_delta={ad_}"),
        ConditionCheck(
            "exponent_sum", ag + ad_ > 1.0,
            f"alpha_gamma + alpha_delta > 1 with sum={ag + ad_}"),
        ConditionCheck(
            "delay_margin", 2.0 * ag - axp > 1.0,
            f"2*alpha_gamma - alpha_d > 1 with value={2.0 * ag - axp}"),
    ]
    # ratio trend gamma_k/delta_k -> 0 (implied by the exponent ordering;
    # reported numerically for visibility)
    r_small = step_size(params, 10**3) / query_radius(params, 10**3)
    r_large = step_size(params, 10**6) / query_radius(params, 10**6)
    checks.append(ConditionCheck(
        "ratio_trend", r_large < r_small,
        f"gamma_k/delta_k decreasing: {r_small:.3e} at k=1e3 vs {r_large:.3e} at k=1e6"))
    if min_ball_radius is not None:
        d1 = float(query_radius(params, 1))
        checks.append(ConditionCheck(
            "radius_bound", d1 <= min_ball_radius,
            f"delta_1={d1:.6g} must not exceed the smallest ball radius {min_ball_radius:.6g}"))
    return ValidationReport(tuple(checks))

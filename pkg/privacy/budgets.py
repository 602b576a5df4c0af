"""
Privacy budgets and conversions between zCDP and approximate DP.

All logarithms are natural. The closed-form conversions are the defaults used by
the estimators; the tight conversions search over Renyi orders and are offered
for reporting.
"""

import math
from typing import Iterable, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from errors import InvalidArgumentError


class ZcdpBudget(BaseModel):
    """A rho-zCDP budget together with where the number came from."""

    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., gt=0)
    provenance: str = "direct"


class ApproxDpBudget(BaseModel):
    """An (epsilon, delta)-DP budget."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(..., gt=0)
    delta: float = Field(..., gt=0, lt=1)

    @field_validator('epsilon', 'delta')
    @classmethod
    def must_be_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("budget parameters must be finite")
        return value


RhoLike = Union[ZcdpBudget, float]


def rho_value(rho: RhoLike) -> float:
    """Extracts a positive rho from a budget or a bare number."""
    value = rho.rho if isinstance(rho, ZcdpBudget) else float(rho)
    if not value > 0 or not math.isfinite(value):
        raise InvalidArgumentError(f"rho must be a positive finite number, got {value}.")
    return value


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}.")


def zcdp_from_approx_dp(budget: ApproxDpBudget) -> ZcdpBudget:
    """rho = eps^2 / (4 ln(1/delta) + 4 eps)."""
    eps, delta = budget.epsilon, budget.delta
    rho = eps ** 2 / (4.0 * math.log(1.0 / delta) + 4.0 * eps)
    return ZcdpBudget(rho=rho, provenance=f"approx-dp(epsilon={eps:g}, delta={delta:g})")


def epsilon_from_zcdp(rho: float, delta: float) -> float:
    """eps = rho + 2 sqrt(rho ln(1/delta)); rho = 0 gives eps = 0."""
    _check_delta(delta)
    if rho < 0:
        raise InvalidArgumentError(f"rho must be non-negative, got {rho}.")
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def approx_dp_from_zcdp(rho: RhoLike, delta: float) -> ApproxDpBudget:
    return ApproxDpBudget(epsilon=epsilon_from_zcdp(rho_value(rho), delta), delta=delta)


def compose_zcdp(budgets: Iterable[ZcdpBudget]) -> ZcdpBudget:
    """zCDP composes additively."""
    budgets = list(budgets)
    if not budgets:
        raise InvalidArgumentError("Cannot compose an empty list of budgets.")
    total = math.fsum(rho_value(b) for b in budgets)
    return ZcdpBudget(rho=total, provenance=f"composition of {len(budgets)}")


def cutting_plane_rho(budget: ApproxDpBudget) -> ZcdpBudget:
    """rho = eps^2 / (16 ln(2/delta) + 8 eps), the share left for the zCDP stages of the cut loop."""
    eps, delta = budget.epsilon, budget.delta
    rho = eps ** 2 / (16.0 * math.log(2.0 / delta) + 8.0 * eps)
    return ZcdpBudget(rho=rho, provenance=f"cutting-plane(epsilon={eps:g}, delta={delta:g})")


# --- Tight conversions ---

def _tight_delta(rho: float, eps: float) -> float:
    """Smallest delta such that rho-zCDP implies (eps, delta)-DP, by bisection over the Renyi order."""
    if rho == 0:
        return 0.0
    amin = 1.01
    amax = (eps + 1) / (2 * rho) + 2
    alpha = amin
    for _ in range(1000):
        alpha = (amin + amax) / 2
        derivative = (2 * alpha - 1) * rho - eps + math.log1p(-1.0 / alpha)
        if derivative < 0:
            amin = alpha
        else:
            amax = alpha
    delta = math.exp((alpha - 1) * (alpha * rho - eps) + alpha * math.log1p(-1 / alpha)) / (alpha - 1.0)
    return min(delta, 1.0)


def tight_epsilon_from_zcdp(rho: float, delta: float) -> float:
    """Smallest eps such that rho-zCDP implies (eps, delta)-DP."""
    _check_delta(delta)
    if rho < 0:
        raise InvalidArgumentError(f"rho must be non-negative, got {rho}.")
    if rho == 0:
        return 0.0
    eps_min, eps_max = 0.0, epsilon_from_zcdp(rho, delta)
    for _ in range(1000):
        eps = (eps_min + eps_max) / 2
        if _tight_delta(rho, eps) <= delta:
            eps_max = eps
        else:
            eps_min = eps
    return eps_max


def tight_zcdp_from_approx_dp(budget: ApproxDpBudget) -> ZcdpBudget:
    """Largest rho whose zCDP guarantee implies the given (eps, delta)-DP."""
    eps, delta = budget.epsilon, budget.delta
    rho_min, rho_max = 0.0, eps + 1
    for _ in range(1000):
        rho = (rho_min + rho_max) / 2
        if _tight_delta(rho, eps) <= delta:
            rho_min = rho
        else:
            rho_max = rho
    return ZcdpBudget(rho=rho_min, provenance=f"tight approx-dp(epsilon={eps:g}, delta={delta:g})")

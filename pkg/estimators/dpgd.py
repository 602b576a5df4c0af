"""
Projected DP gradient descent, the warm-up localization loop and LocDPGD.

DPGD works on the mean objective F/n, whose per-sample gradients have norm at
most 1, and adds N(0, sigma^2 I) with sigma^2 = T / (2 rho n^2) at every step.
Iterates are projected onto the intersection of the a-priori ball B(R) and the
current localization ball, and the average of the post-step iterates is
returned.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

import config
from errors import InvalidArgumentError
from estimators.radius_finder import RadiusFinderConfig, radius_finder
from estimators.results import EstimateResult, LocalizationResult
from geometry.core import Ball, as_dataset, as_point, gm_subgradient
from geometry.projection import project_ball_intersection
from privacy.budgets import RhoLike, rho_value
from privacy.ledger import PrivacyLedger
from privacy.noise import RngLike, RngStream, gaussian_vector

logger = logging.getLogger(__name__)

IterateCallback = Callable[[int, np.ndarray], None]


@dataclass(frozen=True)
class DpgdConfig:
    eta: float
    T: int
    sigma: float
    feasible: Tuple[Ball, Ball]

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f"eta must be positive, got {self.eta}.")
        if self.T < 1:
            raise InvalidArgumentError(f"T must be at least 1, got {self.T}.")
        if not self.sigma > 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}.")


def dpgd_noise_sigma(T: int, rho: RhoLike, n: int) -> float:
    """sqrt(T / (2 rho n^2)), doubled when config.CONSERVATIVE_DPGD_NOISE is set."""
    sigma = math.sqrt(T / (2.0 * rho_value(rho) * n * n))
    return 2.0 * sigma if config.CONSERVATIVE_DPGD_NOISE else sigma


def _child(rng: RngLike, name: str, index: int = 0) -> RngLike:
    return rng.child(name, index) if isinstance(rng, RngStream) else rng


def dpgd(
    init,
    data,
    rho: RhoLike,
    feasible: Tuple[Ball, Ball],
    eta: float,
    T: int,
    rng: RngLike,
    callback: Optional[IterateCallback] = None,
) -> np.ndarray:
    """Runs T noisy projected steps from init and returns the average iterate."""
    points = as_dataset(data)
    n, d = points.shape
    outer, inner = feasible
    theta = as_point(init, d)
    slack = 1e-6 * max(1.0, outer.radius)
    if not (outer.contains(theta, slack) and inner.contains(theta, slack)):
        raise InvalidArgumentError("DPGD initial point is not in the feasible set.")
    cfg = DpgdConfig(eta=eta, T=int(T), sigma=dpgd_noise_sigma(T, rho, n), feasible=feasible)

    total = np.zeros(d)
    for t in range(cfg.T):
        gradient = gm_subgradient(theta, points) / n
        noise = gaussian_vector(cfg.sigma, d, rng)
        theta = project_ball_intersection(theta - cfg.eta * (gradient + noise), outer, inner)
        total += theta
        if callback is not None:
            callback(t, theta)
    return total / cfg.T


def warmup_rounds(R: float, delta_hat: float) -> int:
    """k_wu = ceil(log2(R / delta_hat)), zero when delta_hat >= R."""
    return max(0, math.ceil(math.log2(R / delta_hat) - 1e-12))


def localization(
    data,
    rho: RhoLike,
    r: float,
    beta: float,
    R: float,
    rng: RngStream,
    T_wu: int = config.WARMUP_ITERATIONS,
    callback: Optional[IterateCallback] = None,
) -> LocalizationResult:
    """
    Shrinks B(R) to a ball of radius 25 * delta_hat around a warm start.

    The radius finder gets (rho/2, beta/2); each of the k_wu DPGD rounds gets
    rho / (2 k_wu). A failed radius estimate is returned as failed=True with the
    unused half of the budget recorded as skipped.
    """
    points = as_dataset(data)
    n, d = points.shape
    rho = rho_value(rho)
    ledger = PrivacyLedger()

    rf_cfg = RadiusFinderConfig(gamma=config.LOCALIZATION_GAMMA, rho=rho / 2, beta=beta / 2, r=r, R=R)
    estimate = radius_finder(points, rf_cfg, rng.child("radius-finder"))
    ledger.spend_zcdp("radius-finder", rho / 2)
    origin = np.zeros(d)
    if estimate.failed:
        ledger.spend_zcdp("warmup (skipped)", rho / 2)
        return LocalizationResult(theta0=origin, delta_hat=None, ball=None, failed=True, ledger=ledger)

    delta_hat = estimate.value
    k_wu = warmup_rounds(R, delta_hat)
    outer = Ball.origin(d, R)
    theta, rad = origin, float(R)
    radii = [rad]
    if k_wu == 0:
        ledger.spend_zcdp("warmup (skipped)", rho / 2)
    for t in range(k_wu):
        rho_t = rho / (2 * k_wu)
        eta = rad * math.sqrt(2.0 * d * k_wu / (3.0 * rho * n * n))
        theta = dpgd(theta, points, rho_t, (outer, Ball(theta, rad)), eta, T_wu, rng.child("warmup", t), callback)
        ledger.spend_zcdp(f"warmup-{t}", rho_t)
        rad = 0.5 * rad + config.WARMUP_RADIUS_OFFSET * delta_hat
        radii.append(rad)
        logger.debug("Warm-up round %d/%d done, next radius %.6g.", t + 1, k_wu, rad)

    ball = Ball(theta, config.LOCALIZED_RADIUS_FACTOR * delta_hat)
    logger.info("Localization finished after %d rounds (delta_hat=%.6g).", k_wu, delta_hat)
    return LocalizationResult(theta0=theta, delta_hat=delta_hat, ball=ball, failed=False, radii=radii, ledger=ledger)


def finetune_schedule(n: int, d: int, rho: float, delta_hat: float) -> Tuple[float, int]:
    """eta_ft = 50 delta_hat sqrt(d / (6 rho n^2)), T_ft = max(1, floor(n^2 rho / (256 d)))."""
    eta = config.FINETUNE_STEP_FACTOR * delta_hat * math.sqrt(d / (6.0 * rho * n * n))
    T = max(1, math.floor(n * n * rho / (256.0 * d)))
    return eta, T


def loc_dpgd(data, rho: RhoLike, r: float, beta: float, R: float, rng: RngStream) -> EstimateResult:
    """Localization with (rho/2, beta/2) followed by DPGD with rho/2 over B(R) ∩ B(theta0, 25 delta_hat)."""
    points = as_dataset(data)
    n, d = points.shape
    rho = rho_value(rho)
    ledger = PrivacyLedger()

    loc = localization(points, rho / 2, r, beta / 2, R, rng.child("localization"))
    ledger.extend(loc.ledger, "localization")
    if loc.failed:
        ledger.spend_zcdp("finetune (skipped)", rho / 2)
        return EstimateResult(theta=np.zeros(d), failed=True, ledger=ledger)

    eta, T = finetune_schedule(n, d, rho, loc.delta_hat)
    feasible = (Ball.origin(d, R), loc.ball)
    theta = dpgd(loc.theta0, points, rho / 2, feasible, eta, T, rng.child("finetune"))
    ledger.spend_zcdp("finetune", rho / 2)
    return EstimateResult(
        theta=theta,
        failed=False,
        ledger=ledger,
        delta_hat=loc.delta_hat,
        details={"warmup_radii": loc.radii, "finetune_steps": T, "finetune_eta": eta},
    )


def baseline_schedule(n: int, d: int, rho: float, R: float) -> Tuple[float, int]:
    """eta = 2R sqrt(d / (12 rho n^2)); T = max(1, floor(n^2 rho / (128 d))) so that sqrt(2/T) = 16 sqrt(d) / (n sqrt(rho))."""
    eta = 2.0 * R * math.sqrt(d / (12.0 * rho * n * n))
    T = max(1, math.floor(n * n * rho / (128.0 * d)))
    return eta, T


def dpgd_baseline(data, rho: RhoLike, R: float, rng: RngLike) -> EstimateResult:
    """Plain DPGD from the origin over the full ball B(R)."""
    points = as_dataset(data)
    n, d = points.shape
    rho = rho_value(rho)
    eta, T = baseline_schedule(n, d, rho, R)
    ball = Ball.origin(d, R)
    theta = dpgd(np.zeros(d), points, rho, (ball, ball), eta, T, _child(rng, "dpgd-baseline"))
    ledger = PrivacyLedger()
    ledger.spend_zcdp("dpgd-baseline", rho)
    return EstimateResult(theta=theta, failed=False, ledger=ledger, details={"steps": T, "eta": eta})

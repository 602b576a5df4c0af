"""
Localized DP cutting-plane method.

Starting from the localized ball, every iteration takes the analytic centre of
the current region, releases a noisy gradient there and keeps the halfspace on
the descent side. The final output is chosen among the centres with an
exponential mechanism on the objective.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

import config
from errors import EstimationError, InvalidArgumentError, RegionEmptyError
from estimators.dpgd import localization
from estimators.results import EstimateResult
from geometry.core import Ball, as_dataset, as_point, gm_objective, gm_subgradient
from privacy.budgets import ApproxDpBudget, cutting_plane_rho
from privacy.ledger import PrivacyLedger
from privacy.noise import RngLike, RngStream, as_generator, gaussian_vector, noise_is_disabled

logger = logging.getLogger(__name__)

PHASE_I_ROUNDS = 64
PHASE_I_HALVINGS = 60
LINE_SEARCH_ALPHA = 0.25
LINE_SEARCH_BETA = 0.5


@dataclass(frozen=True)
class Halfspace:
    """The open halfspace {theta : <normal, theta> < offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(normal))
        if not math.isfinite(norm) or norm == 0.0:
            raise InvalidArgumentError("Halfspace normal must be finite and nonzero.")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def through(cls, normal, point) -> "Halfspace":
        normal = np.asarray(normal, dtype=float)
        return cls(normal, float(normal @ np.asarray(point, dtype=float)))

    def slack(self, theta) -> float:
        return self.offset - float(self.normal @ theta)

    def contains(self, theta) -> bool:
        return self.slack(theta) > 0


@dataclass(frozen=True)
class CutRegion:
    """Base ball, optional bounding ball, and the cuts made so far."""

    base: Ball
    cuts: Tuple[Halfspace, ...] = ()
    bound: Optional[Ball] = None

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def balls(self) -> List[Ball]:
        return [self.base] if self.bound is None else [self.base, self.bound]

    def with_cut(self, cut: Halfspace) -> "CutRegion":
        return replace(self, cuts=self.cuts + (cut,))

    @cached_property
    def _normals(self) -> np.ndarray:
        if not self.cuts:
            return np.zeros((0, self.dim))
        return np.stack([h.normal for h in self.cuts])

    @cached_property
    def _offsets(self) -> np.ndarray:
        return np.array([h.offset for h in self.cuts], dtype=float)

    def _cut_slacks(self, theta: np.ndarray) -> np.ndarray:
        return self._offsets - self._normals @ theta

    def _normalized_slacks(self, theta: np.ndarray) -> np.ndarray:
        cut_slacks = self._cut_slacks(theta) / np.linalg.norm(self._normals, axis=1)
        ball_slacks = [b.radius - float(np.linalg.norm(theta - b.center)) for b in self.balls]
        return np.concatenate([cut_slacks, ball_slacks])

    def contains(self, theta, strict: bool = True) -> bool:
        slacks = self._normalized_slacks(np.asarray(theta, dtype=float))
        return bool(np.all(slacks > 0)) if strict else bool(np.all(slacks >= 0))

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        inside = np.all(points @ self._normals.T < self._offsets, axis=1)
        for b in self.balls:
            inside &= np.linalg.norm(points - b.center, axis=1) <= b.radius
        return inside

    def barrier(self, theta: np.ndarray) -> float:
        """-sum log(offset_j - <n_j, theta>) - sum over balls log(r^2 - ||theta - c||^2)."""
        slacks = self._cut_slacks(theta)
        if np.any(slacks <= 0):
            return math.inf
        total = -float(np.log(slacks).sum())
        for b in self.balls:
            q = b.radius ** 2 - float(np.sum((theta - b.center) ** 2))
            if q <= 0:
                return math.inf
            total -= math.log(q)
        return total

    def barrier_derivatives(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = self.dim
        scaled = self._normals / self._cut_slacks(theta)[:, None]
        grad = scaled.sum(axis=0)
        hess = scaled.T @ scaled
        for b in self.balls:
            diff = theta - b.center
            q = b.radius ** 2 - float(diff @ diff)
            grad += 2.0 * diff / q
            hess += 2.0 * np.eye(d) / q + 4.0 * np.outer(diff, diff) / q ** 2
        return grad, hess


@dataclass(frozen=True)
class CuttingPlaneConfig:
    budget: ApproxDpBudget
    tau: float = config.CUTTING_PLANE_TAU
    k_ft: Optional[int] = None
    c_kft: float = config.CUTTING_PLANE_C_KFT

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise InvalidArgumentError(f"tau must lie in (0, 1], got {self.tau}.")
        if self.k_ft is not None and self.k_ft < 1:
            raise InvalidArgumentError(f"k_ft must be positive, got {self.k_ft}.")
        if not self.c_kft > 0:
            raise InvalidArgumentError(f"c_kft must be positive, got {self.c_kft}.")


def _violation(region: CutRegion, theta: np.ndarray, margin: float) -> float:
    return float(np.maximum(0.0, margin - region._normalized_slacks(theta)).sum())


def _inward_direction(region: CutRegion, theta: np.ndarray, margin: float) -> np.ndarray:
    units = region._normals / np.linalg.norm(region._normals, axis=1, keepdims=True)
    tight = region._cut_slacks(theta) / np.linalg.norm(region._normals, axis=1) < margin
    direction = -units[tight].sum(axis=0)
    for b in region.balls:
        offset = b.center - theta
        dist = float(np.linalg.norm(offset))
        if b.radius - dist < margin and dist > 0:
            direction += offset / dist
    return direction


def strictly_feasible_point(region: CutRegion, start: Optional[np.ndarray] = None) -> np.ndarray:
    """Phase I: moves along the average inward normal of violated constraints, halving the step."""
    theta = region.base.center.copy() if start is None else as_point(start, region.dim)
    scale = region.base.radius
    margin = 1e-12 * max(1.0, scale)
    for _ in range(PHASE_I_ROUNDS):
        violation = _violation(region, theta, margin)
        if violation == 0.0:
            return theta
        direction = _inward_direction(region, theta, margin)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            break
        direction /= norm
        step = scale
        for _ in range(PHASE_I_HALVINGS):
            candidate = theta + step * direction
            if _violation(region, candidate, margin) < violation:
                theta = candidate
                break
            step /= 2
        else:
            break
    raise RegionEmptyError("Could not find a strictly feasible point; the region has no interior.")


def analytic_centre(
    region: CutRegion,
    tol: float = config.NEWTON_TOL,
    start: Optional[np.ndarray] = None,
    max_steps: int = config.NEWTON_MAX_STEPS,
) -> np.ndarray:
    """Minimizer of the log-barrier of the region by damped Newton with backtracking."""
    theta = strictly_feasible_point(region, start)
    value = region.barrier(theta)
    for step in range(max_steps):
        grad, hess = region.barrier_derivatives(theta)
        if float(np.linalg.norm(grad)) <= tol:
            break
        direction = -np.linalg.solve(hess, grad)
        decrement = float(-grad @ direction)
        if decrement / 2.0 <= tol:
            break
        t = 1.0
        while t > 1e-16:
            candidate = theta + t * direction
            candidate_value = region.barrier(candidate)
            if candidate_value <= value - LINE_SEARCH_ALPHA * t * decrement:
                break
            t *= LINE_SEARCH_BETA
        else:
            logger.debug("Backtracking stalled after %d Newton steps.", step)
            break
        theta, value = candidate, candidate_value
    return theta


def estimate_volume_fraction(region: CutRegion, cut: Halfspace, samples: int, rng: RngLike) -> float:
    """Monte Carlo estimate of vol(region ∩ cut) / vol(region) by rejection from the base ball."""
    d = region.dim
    if d > config.VOLUME_MAX_DIM:
        raise InvalidArgumentError(f"Volume estimation supports d <= {config.VOLUME_MAX_DIM}, got {d}.")
    if samples < 1:
        raise InvalidArgumentError(f"samples must be positive, got {samples}.")
    gen = as_generator(rng)
    directions = gen.standard_normal((samples, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = region.base.radius * gen.random(samples) ** (1.0 / d)
    points = region.base.center + directions * radii[:, None]
    accepted = points[region.contains_many(points)]
    if accepted.shape[0] == 0:
        raise EstimationError("No samples fell inside the region.")
    return float(np.mean(accepted @ cut.normal < cut.offset))


def selection_probabilities(scores: Sequence[float], epsilon: float, delta_hat: float) -> np.ndarray:
    """pi(t) proportional to exp(-epsilon * score_t / (448 * delta_hat))."""
    if not epsilon > 0 or not delta_hat > 0:
        raise InvalidArgumentError("epsilon and delta_hat must be positive.")
    logits = -epsilon * np.asarray(scores, dtype=float) / (config.EXP_MECH_SCALE * delta_hat)
    return softmax(logits)


def exp_mech_select(candidates: Sequence[np.ndarray], data, epsilon: float, delta_hat: float, rng: RngLike) -> int:
    """Samples a candidate index with probability proportional to exp(-epsilon F(theta_t) / (448 delta_hat))."""
    if len(candidates) == 0:
        raise InvalidArgumentError("Need at least one candidate.")
    points = as_dataset(data)
    scores = [gm_objective(c, points) for c in candidates]
    probabilities = selection_probabilities(scores, epsilon, delta_hat)
    if noise_is_disabled():
        return int(np.argmax(probabilities))
    return int(as_generator(rng).choice(len(candidates), p=probabilities))


def cut_count(n: int, d: int, rho: float, tau: float = config.CUTTING_PLANE_TAU, c_kft: float = config.CUTTING_PLANE_C_KFT) -> int:
    """k_ft = ceil(c_kft (d / tau) ln(n sqrt(tau rho) / sqrt(d) + sqrt(d)))."""
    kappa = n * math.sqrt(tau * rho) / math.sqrt(d) + math.sqrt(d)
    return max(1, math.ceil(c_kft * (d / tau) * math.log(kappa)))


@dataclass
class CuttingPlaneResult(EstimateResult):
    iterates: List[np.ndarray] = field(default_factory=list)
    cuts: List[Halfspace] = field(default_factory=list)
    index: Optional[int] = None


def loc_dp_cutting_plane(data, cfg: CuttingPlaneConfig, r: float, beta: float, R: float, rng: RngStream) -> CuttingPlaneResult:
    """
    Runs localization with (rho/2, min(beta/3, delta/2)), then up to k_ft noisy
    cuts, and selects one centre with the exponential mechanism.
    """
    points = as_dataset(data)
    n, d = points.shape
    eps, delta = cfg.budget.epsilon, cfg.budget.delta
    rho = cutting_plane_rho(cfg.budget).rho
    ledger = PrivacyLedger()

    loc = localization(points, rho / 2, r, min(beta / 3, delta / 2), R, rng.child("localization"))
    ledger.extend(loc.ledger, "localization")
    if loc.failed:
        ledger.spend_zcdp("cut-directions (skipped)", rho / 2)
        ledger.spend_pure("selection (skipped)", eps / 2)
        return CuttingPlaneResult(theta=np.zeros(d), failed=True, ledger=ledger)

    k_ft = cfg.k_ft or cut_count(n, d, rho, cfg.tau, cfg.c_kft)
    sigma = math.sqrt(k_ft / rho)
    if config.CONSERVATIVE_DPGD_NOISE:
        sigma *= 2.0
    region = CutRegion(base=loc.ball, bound=Ball.origin(d, R))
    iterates: List[np.ndarray] = []
    cuts: List[Halfspace] = []
    hint = None
    for t in range(k_ft):
        try:
            centre = analytic_centre(region, start=hint)
        except RegionEmptyError:
            logger.warning("Cut region lost its interior after %d cuts; selecting among %d iterates.", t, len(iterates))
            break
        iterates.append(centre)
        direction = gm_subgradient(centre, points) + gaussian_vector(sigma, d, rng.child("direction", t))
        if not np.any(direction):
            break
        cut = Halfspace.through(direction, centre)
        cuts.append(cut)
        region = region.with_cut(cut)
        hint = centre
    ledger.spend_zcdp("cut-directions", rho / 2)

    if not iterates:
        iterates.append(loc.theta0)
    index = exp_mech_select(iterates, points, eps, loc.delta_hat, rng.child("selection"))
    ledger.spend_pure("selection", eps / 2)
    logger.info("Cutting plane ran %d of %d cuts, selected iterate %d.", len(cuts), k_ft, index)
    return CuttingPlaneResult(
        theta=iterates[index],
        failed=False,
        ledger=ledger,
        delta_hat=loc.delta_hat,
        details={"k_ft": k_ft, "cuts_made": len(cuts)},
        iterates=iterates,
        cuts=cuts,
        index=index,
    )

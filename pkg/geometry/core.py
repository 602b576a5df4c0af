"""
Geometric-median objective, subgradients and the non-private Weiszfeld oracle.

Every routine takes the dataset as an ``(n, d)`` array of points and is a pure
function of its inputs. The objective is the unnormalised sum of Euclidean
distances; callers that optimise the mean objective divide by ``n`` themselves.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import nnls
from scipy.spatial.distance import pdist

import config
from errors import ConvergenceError, InvalidArgumentError

logger = logging.getLogger(__name__)

# Alias for an (n, d) float array of data points.
Dataset = np.ndarray


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball B(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if not np.all(np.isfinite(center)):
            raise InvalidArgumentError("Ball center must be finite.")
        if not self.radius >= 0 or not math.isfinite(self.radius):
            raise InvalidArgumentError(f"Ball radius must be a finite non-negative number, got {self.radius}.")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, point: np.ndarray, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(np.asarray(point, dtype=float) - self.center)) <= self.radius + tol

    @classmethod
    def origin(cls, dim: int, radius: float) -> "Ball":
        return cls(np.zeros(dim), radius)


@dataclass(frozen=True)
class QuantileSpec:
    """Fraction of points a quantile radius must cover."""

    gamma: float

    def __post_init__(self):
        if not 0.5 < self.gamma <= 1.0:
            raise InvalidArgumentError(f"gamma must lie in (1/2, 1], got {self.gamma}.")


def as_dataset(data) -> Dataset:
    """Validates and converts points to a 2-D float array."""
    points = np.asarray(data, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
        raise InvalidArgumentError(f"Dataset must be a non-empty (n, d) array, got shape {points.shape}.")
    if not np.all(np.isfinite(points)):
        raise InvalidArgumentError("Dataset contains non-finite values.")
    return points


def as_point(theta, dim: int) -> np.ndarray:
    point = np.asarray(theta, dtype=float).reshape(-1)
    if point.shape[0] != dim:
        raise InvalidArgumentError(f"Point has dimension {point.shape[0]}, dataset has dimension {dim}.")
    return point


def gm_objective(theta, data) -> float:
    """Sum of Euclidean distances from theta to every data point."""
    points = as_dataset(data)
    point = as_point(theta, points.shape[1])
    return float(np.linalg.norm(points - point, axis=1).sum())


def _unit_residuals(point: np.ndarray, points: Dataset):
    """Returns the summed unit vectors (point - x_i) over x_i != point and the coincident count."""
    diff = point - points
    dist = np.linalg.norm(diff, axis=1)
    coincident = dist == 0.0
    units = diff[~coincident] / dist[~coincident, None]
    return units.sum(axis=0), int(coincident.sum())


def gm_subgradient(theta, data) -> np.ndarray:
    """Subgradient of the objective using 0 for points that coincide with theta."""
    points = as_dataset(data)
    point = as_point(theta, points.shape[1])
    residual, _ = _unit_residuals(point, points)
    return residual


def is_optimal_at(theta, data, slack: float = 0.0) -> bool:
    """First-order optimality: the non-coincident unit vectors cancel within the coincident count."""
    points = as_dataset(data)
    point = as_point(theta, points.shape[1])
    residual, coincident = _unit_residuals(point, points)
    return float(np.linalg.norm(residual)) <= coincident + slack


def quantile_radius(data, theta, gamma: float) -> float:
    """The ceil(gamma * n)-th smallest distance from theta to the data."""
    if not 0.0 < gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in (0, 1], got {gamma}.")
    points = as_dataset(data)
    point = as_point(theta, points.shape[1])
    n = points.shape[0]
    k = max(1, math.ceil(gamma * n - 1e-9))
    dist = np.linalg.norm(points - point, axis=1)
    return float(np.partition(dist, k - 1)[k - 1])


def weiszfeld_gm(data, tol: float = config.WEISZFELD_TOL, max_iter: int = config.WEISZFELD_MAX_ITER) -> np.ndarray:
    """
    Non-private geometric median by Weiszfeld iteration.

    Stops when the subgradient norm is at most ``tol * n``, or when the data point
    nearest to the iterate passes the subgradient-ball optimality test. An iterate
    that lands exactly on a non-optimal data point is moved a distance ``tol``
    along the negative residual. Raises ConvergenceError with the best iterate
    when ``max_iter`` is exhausted.
    """
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}.")
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be positive, got {max_iter}.")
    points = as_dataset(data)
    n = points.shape[0]
    if n == 1:
        return points[0].copy()

    theta = points.mean(axis=0)
    best, best_norm = theta.copy(), math.inf
    for iteration in range(max_iter):
        diff = theta - points
        dist = np.linalg.norm(diff, axis=1)

        nearest = points[int(np.argmin(dist))]
        if is_optimal_at(nearest, points):
            logger.debug("Weiszfeld stopped at a data point after %d iterations.", iteration)
            return nearest.copy()

        coincident = dist == 0.0
        residual = (diff[~coincident] / dist[~coincident, None]).sum(axis=0)
        residual_norm = float(np.linalg.norm(residual))
        if residual_norm < best_norm:
            best, best_norm = theta.copy(), residual_norm
        if residual_norm <= tol * n:
            logger.debug("Weiszfeld converged in %d iterations.", iteration)
            return theta

        if coincident.any():
            theta = theta - tol * residual / residual_norm
            continue
        weights = 1.0 / dist
        theta = weights @ points / weights.sum()

    raise ConvergenceError(
        f"Weiszfeld did not reach subgradient norm {tol * n:.3g} in {max_iter} iterations "
        f"(best {best_norm:.3g}).",
        best_iterate=best,
    )


def hull_distance(point, data) -> float:
    """Distance from a point to the convex hull of the data (weighted NNLS on barycentric weights)."""
    points = as_dataset(data)
    target = as_point(point, points.shape[1])
    scale = max(1.0, float(np.abs(points).max()))
    weight = 1e4 * scale
    system = np.vstack([points.T, weight * np.ones((1, points.shape[0]))])
    rhs = np.concatenate([target, [weight]])
    coeffs, _ = nnls(system, rhs)
    coeffs = coeffs / coeffs.sum()
    return float(np.linalg.norm(coeffs @ points - target))


def diameter(data) -> float:
    points = as_dataset(data)
    if points.shape[0] == 1:
        return 0.0
    return float(pdist(points).max())


def clip_to_ball(data, R: float) -> Dataset:
    """Scales every point with norm above R back onto the sphere of radius R."""
    if R <= 0:
        raise InvalidArgumentError(f"R must be positive, got {R}.")
    points = as_dataset(data)
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    scale = np.minimum(1.0, R / np.maximum(norms, 1e-300))
    return points * scale


def single_replacement_shift_bound(data, theta_star: Optional[np.ndarray] = None) -> float:
    """Worst-case geometric-median shift from replacing one point: (3/2) * Delta_{3n/4}(theta*)."""
    points = as_dataset(data)
    if points.shape[0] < 4:
        raise InvalidArgumentError("The single-replacement shift bound needs at least 4 points.")
    if theta_star is None:
        theta_star = weiszfeld_gm(points)
    return 1.5 * quantile_radius(points, theta_star, 0.75)

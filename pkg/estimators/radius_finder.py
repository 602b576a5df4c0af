"""
Private estimate of the quantile radius around the geometric median.

Pairwise distances are computed once; for every grid value nu the query N(nu)
is the mean of the m = ceil(gamma * n) largest neighbour counts. Queries are fed
in increasing order of nu to AboveThreshold, and the first noisy exceedance
fixes the estimate 2^i * r.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.neighbors import BallTree

from errors import InvalidArgumentError
from geometry.core import QuantileSpec, as_dataset
from privacy.budgets import RhoLike, rho_value
from privacy.noise import RngLike
from privacy.sparse_vector import above_threshold

logger = logging.getLogger(__name__)

THRESHOLD_FACTOR = 18.0


@dataclass(frozen=True)
class RadiusFinderConfig:
    gamma: float
    rho: RhoLike
    beta: float
    r: float
    R: float

    def __post_init__(self):
        QuantileSpec(self.gamma)
        rho_value(self.rho)
        if not 0 < self.beta <= 1:
            raise InvalidArgumentError(f"beta must lie in (0, 1], got {self.beta}.")
        if not 0 < self.r < self.R:
            raise InvalidArgumentError(f"Need 0 < r < R, got r={self.r}, R={self.R}.")


@dataclass(frozen=True)
class RadiusEstimate:
    """Grid value 2^index * r, or Fail when value is None."""

    value: Optional[float]
    index: Optional[int]

    @property
    def failed(self) -> bool:
        return self.value is None


def grid_size(r: float, R: float) -> int:
    """ceil(log2(2R / r)), the largest grid exponent."""
    return max(0, math.ceil(math.log2(2.0 * R / r) - 1e-12))


def radius_grid(r: float, R: float) -> List[float]:
    return [r * 2.0 ** i for i in range(grid_size(r, R) + 1)]


def radius_threshold(m: int, cfg: RadiusFinderConfig) -> float:
    """m + (18 / sqrt(2 rho)) * ln((2 / beta) * ceil(log2(2R / r)))."""
    K = grid_size(cfg.r, cfg.R)
    return m + THRESHOLD_FACTOR / math.sqrt(2.0 * rho_value(cfg.rho)) * math.log((2.0 / cfg.beta) * K)


def quantile_count(gamma: float, n: int) -> int:
    return max(1, math.ceil(gamma * n - 1e-9))


def neighbor_counts(data, nu: float) -> np.ndarray:
    """N_i(nu) = |{j : ||x_j - x_i|| <= nu}|, self included."""
    if nu < 0:
        raise InvalidArgumentError(f"nu must be non-negative, got {nu}.")
    points = as_dataset(data)
    tree = BallTree(points)
    return tree.query_radius(points, r=nu, count_only=True).astype(int)


def top_m_average(counts, m: int) -> float:
    """Mean of the m largest counts."""
    counts = np.asarray(counts)
    if not 1 <= m <= counts.shape[0]:
        raise InvalidArgumentError(f"m must lie in [1, {counts.shape[0]}], got {m}.")
    top = np.partition(counts, counts.shape[0] - m)[counts.shape[0] - m:]
    return float(top.sum()) / m


class PairwiseCounts:
    """Neighbour counts for any radius from a single sorted distance table."""

    def __init__(self, data):
        points = as_dataset(data)
        self.n = points.shape[0]
        self.sorted_distances = np.sort(cdist(points, points), axis=1)

    def counts(self, nu: float) -> np.ndarray:
        return (self.sorted_distances <= nu).sum(axis=1)

    def query(self, nu: float, m: int) -> float:
        return top_m_average(self.counts(nu), m)


def radius_finder(data, cfg: RadiusFinderConfig, rng: RngLike) -> RadiusEstimate:
    """Runs AboveThreshold over the doubling grid r, 2r, ..., 2^K r."""
    points = as_dataset(data)
    n = points.shape[0]
    m = quantile_count(cfg.gamma, n)
    grid = radius_grid(cfg.r, cfg.R)
    threshold = radius_threshold(m, cfg)
    table = PairwiseCounts(points)

    def queries() -> Iterator[float]:
        for nu in grid:
            yield table.query(nu, m)

    index = above_threshold(queries(), cfg.rho, threshold, rng)
    if index is None:
        logger.warning("Radius finder failed: no grid value exceeded threshold %.3f (n=%d, m=%d).", threshold, n, m)
        return RadiusEstimate(value=None, index=None)
    logger.info("Radius finder chose grid index %d (delta_hat=%.6g).", index, grid[index])
    return RadiusEstimate(value=grid[index], index=index)


def lower_quantile_factor(gamma: float) -> float:
    """(2 gamma - 1) / (4 gamma - 1)."""
    return (2.0 * gamma - 1.0) / (4.0 * gamma - 1.0)


def inflated_gamma(cfg: RadiusFinderConfig, n: int) -> float:
    """min(gamma + (36 / (n sqrt(2 rho))) ln(2 (K + 1) / beta), 1)."""
    K = grid_size(cfg.r, cfg.R)
    bump = 36.0 / (n * math.sqrt(2.0 * rho_value(cfg.rho))) * math.log(2.0 * (K + 1) / cfg.beta)
    return min(cfg.gamma + bump, 1.0)

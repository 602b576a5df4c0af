"""
Pure-DP inverse-sensitivity sampler over a lattice grid of B(R).

len(X, theta) is the fewest points that must be moved to make theta a geometric
median. Moving a point onto theta turns its subgradient into the unit ball, so
len is the smallest k for which some n - k kept points have unit subgradients
summing to a vector of norm at most k plus the number of kept points already
at theta.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.special import softmax

import config
from errors import InvalidArgumentError, SizeLimitError
from geometry.core import as_dataset, as_point, gm_objective, quantile_radius, weiszfeld_gm
from privacy.noise import RngLike, as_generator, noise_is_disabled

logger = logging.getLogger(__name__)

LenMode = Literal["exact", "greedy"]
LenValue = int

LEN_TOL = 1e-7
DISTANCE_GAMMAS = (0.6, 0.75, 0.9)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned lattice with the given spacing, intersected with B(0, R)."""

    R: float
    spacing: float
    d: int

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidArgumentError(f"R must be positive, got {self.R}.")
        if not self.spacing > 0:
            raise InvalidArgumentError(f"spacing must be positive, got {self.spacing}.")
        if not 1 <= self.d <= config.SINVS_MAX_DIM:
            raise InvalidArgumentError(f"Grid dimension must be 1 or 2, got {self.d}.")

    @property
    def axis_size(self) -> int:
        return 2 * math.floor(self.R / self.spacing + 1e-9) + 1


def grid_nodes(grid: GridSpec) -> np.ndarray:
    axis = grid.spacing * (np.arange(grid.axis_size) - grid.axis_size // 2)
    mesh = np.meshgrid(*([axis] * grid.d), indexing="ij")
    nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return nodes[np.linalg.norm(nodes, axis=1) <= grid.R * (1 + 1e-12)]


def _unit_vectors(points: np.ndarray, theta: np.ndarray):
    diff = theta - points
    dist = np.linalg.norm(diff, axis=1)
    coincident = dist == 0.0
    return diff[~coincident] / dist[~coincident, None], int(coincident.sum())


def _collinear(units: np.ndarray) -> bool:
    if units.shape[1] == 1 or units.shape[0] <= 1:
        return True
    return bool(np.all(np.abs(units @ units[0]) >= 1.0 - 1e-12))


@lru_cache(maxsize=None)
def _removal_masks(m: int) -> np.ndarray:
    """Every subset of m items as a 0/1 row."""
    return ((np.arange(2 ** m)[:, None] >> np.arange(m)) & 1).astype(float)


def _len_collinear(units: np.ndarray, coincident: int) -> int:
    signs = units @ units[0] if units.shape[0] else np.zeros(0)
    imbalance = abs(int(np.sum(signs > 0)) - int(np.sum(signs < 0)))
    return max(0, math.ceil((imbalance - coincident - LEN_TOL) / 2))


def _len_exact(units: np.ndarray, coincident: int) -> int:
    masks = _removal_masks(units.shape[0])
    residual = units.sum(axis=0) - masks @ units
    removed = masks.sum(axis=1)
    feasible = np.linalg.norm(residual, axis=1) <= removed + coincident + LEN_TOL
    return int(removed[feasible].min())


def _len_greedy(units: np.ndarray, coincident: int) -> int:
    residual = units.sum(axis=0)
    kept = list(range(units.shape[0]))
    k = 0
    while np.linalg.norm(residual) > k + coincident + LEN_TOL:
        trial = np.linalg.norm(residual - units[kept], axis=1)
        drop = kept.pop(int(np.argmin(trial)))
        residual = residual - units[drop]
        k += 1
    return k


def len_at(data, theta, mode: LenMode = "exact") -> LenValue:
    """Fewest point moves that make theta a geometric median, capped at ceil(n/2)."""
    points = as_dataset(data)
    n = points.shape[0]
    point = as_point(theta, points.shape[1])
    units, coincident = _unit_vectors(points, point)
    if mode == "greedy":
        value = _len_greedy(units, coincident)
    elif mode == "exact":
        if _collinear(units):
            value = _len_collinear(units, coincident)
        elif n > config.SINVS_EXACT_MAX_N:
            raise SizeLimitError(f"Exact len needs n <= {config.SINVS_EXACT_MAX_N} for non-collinear data, got n={n}.")
        else:
            value = _len_exact(units, coincident)
    else:
        raise InvalidArgumentError(f"Unknown len mode {mode!r}.")
    return min(value, math.ceil(n / 2))


class SInvSMechanism:
    """Len table over the grid nodes and the exp(-epsilon * len / 2) sampling distribution."""

    def __init__(self, data, epsilon: float, grid: GridSpec, mode: LenMode = "exact", max_workers: int = 1):
        if not epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}.")
        self.points = as_dataset(data)
        if self.points.shape[1] != grid.d:
            raise InvalidArgumentError(f"Grid dimension {grid.d} does not match data dimension {self.points.shape[1]}.")
        self.epsilon = epsilon
        self.grid = grid
        self.nodes = grid_nodes(grid)
        if self.nodes.shape[0] == 0:
            raise InvalidArgumentError("The grid has no nodes inside the ball.")
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                lens = list(pool.map(lambda node: len_at(self.points, node, mode), self.nodes))
        else:
            lens = [len_at(self.points, node, mode) for node in self.nodes]
        self.lens = np.asarray(lens, dtype=int)
        self.probabilities = softmax(-0.5 * epsilon * self.lens)
        logger.info("Built len table over %d nodes (min len %d, max len %d).", len(self.lens), self.lens.min(), self.lens.max())

    def sample_index(self, rng: RngLike, size: Optional[int] = None):
        if noise_is_disabled():
            best = int(np.argmax(self.probabilities))
            return best if size is None else np.full(size, best)
        return as_generator(rng).choice(self.nodes.shape[0], size=size, p=self.probabilities)

    def sample(self, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
        return self.nodes[self.sample_index(rng, size)]

    def len_table_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.nodes, columns=[f"node_{i}" for i in range(self.grid.d)])
        frame["len"] = self.lens
        frame["probability"] = self.probabilities
        return frame

    def dump_len_table(self, path: Union[str, Path]) -> None:
        self.len_table_frame().to_csv(path, index=False, float_format="%.12g")


def sinvs_sample(
    data,
    epsilon: float,
    r: float,
    R: float,
    grid: GridSpec,
    rng: RngLike,
    mode: LenMode = "exact",
) -> np.ndarray:
    """Draws one grid node with probability proportional to exp(-epsilon * len / 2)."""
    if grid.spacing > r:
        raise InvalidArgumentError(f"Grid spacing {grid.spacing} exceeds the discretization r={r}.")
    if grid.R != R:
        raise InvalidArgumentError(f"Grid radius {grid.R} does not match R={R}.")
    return SInvSMechanism(data, epsilon, grid, mode).sample(rng)


def inverse_sensitivity_k(epsilon: float, beta: float, d: int, R: float, r: float) -> int:
    """k* = floor((2 / epsilon) (ln(1 / beta) + d ln(R / r)))."""
    return math.floor((2.0 / epsilon) * (math.log(1.0 / beta) + d * math.log(R / r)))


def k_stability_bound(data, k: int) -> float:
    """2 F(theta0) / (n - 2k): how far replacing k points can move the geometric median."""
    points = as_dataset(data)
    n = points.shape[0]
    if k < 0 or 2 * k >= n:
        raise InvalidArgumentError(f"k must satisfy 0 <= k < n/2, got k={k}, n={n}.")
    theta0 = weiszfeld_gm(points)
    return 2.0 * gm_objective(theta0, points) / (n - 2 * k)


def sinvs_utility_bound(data, k: int, r: float) -> float:
    """(1 + 4k / (n - 2k)) F(theta*) + n r, the objective a sample with len <= k can reach."""
    points = as_dataset(data)
    n = points.shape[0]
    if k < 0 or 2 * k >= n:
        raise InvalidArgumentError(f"k must satisfy 0 <= k < n/2, got k={k}, n={n}.")
    f_star = gm_objective(weiszfeld_gm(points), points)
    return (1.0 + 4.0 * k / (n - 2 * k)) * f_star + n * r


def sinvs_distance_bound(data, k: int, r: float, gammas: Sequence[float] = DISTANCE_GAMMAS) -> float:
    """
    r + min over gamma of Delta_{gamma n}(theta*) / sqrt(2g - g^2) with g = gamma - k/n.

    Only gammas above k/n + 1/2 take part; inf when none does.
    """
    points = as_dataset(data)
    n = points.shape[0]
    theta_star = weiszfeld_gm(points)
    radii = []
    for gamma in gammas:
        g = gamma - k / n
        if g > 0.5:
            radii.append(quantile_radius(points, theta_star, gamma) / math.sqrt(2.0 * g - g * g))
    return r + min(radii) if radii else math.inf

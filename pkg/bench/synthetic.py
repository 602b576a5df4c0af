"""Synthetic benchmark data: a tight cluster far from the origin plus uniform outliers."""

import math
from typing import Tuple

import numpy as np

import config
from errors import InvalidArgumentError
from geometry.core import Dataset
from privacy.noise import RngLike, as_generator


def cluster_size(n: int) -> int:
    return int(math.floor(config.SYNTHETIC_CLUSTER_FRACTION * n + 1e-9))


def uniform_in_ball(count: int, d: int, radius: float, rng: RngLike) -> np.ndarray:
    """Uniform samples from B_d(radius): Gaussian direction, radius ~ U^(1/d)."""
    gen = as_generator(rng)
    directions = gen.standard_normal((count, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    directions /= np.maximum(norms, 1e-300)
    radii = radius * gen.random(count) ** (1.0 / d)
    return directions * radii[:, None]


def generate_synthetic_with_center(n: int, d: int, rng: RngLike) -> Tuple[Dataset, np.ndarray]:
    if n < 10:
        raise InvalidArgumentError(f"Synthetic data needs n >= 10, got {n}.")
    if d < 1:
        raise InvalidArgumentError(f"Dimension must be positive, got {d}.")
    gen = as_generator(rng)
    direction = gen.standard_normal(d)
    direction /= max(np.linalg.norm(direction), 1e-300)
    mu = config.SYNTHETIC_CLUSTER_NORM * direction

    m = cluster_size(n)
    cluster = mu + config.SYNTHETIC_CLUSTER_STD * gen.standard_normal((m, d))
    outliers = uniform_in_ball(n - m, d, config.SYNTHETIC_OUTLIER_RADIUS, gen)
    data = np.vstack([cluster, outliers])
    return data[gen.permutation(n)], mu


def generate_synthetic(n: int, d: int, rng: RngLike) -> Dataset:
    data, _ = generate_synthetic_with_center(n, d, rng)
    return data

"""AboveThreshold over a sensitivity-3 query family."""

import math
from typing import Iterable, Optional

from privacy.budgets import RhoLike, rho_value
from privacy.noise import RngLike, as_generator, laplace_scalar

THRESHOLD_NOISE = 6.0
QUERY_NOISE = 12.0


def above_threshold(queries: Iterable[float], rho: RhoLike, threshold: float, rng: RngLike) -> Optional[int]:
    """
    Returns the index of the first query whose noisy value strictly exceeds the
    noisy threshold, or None (Fail). Queries may be produced lazily; evaluation
    stops at the first exceedance.
    """
    scale = math.sqrt(2.0 * rho_value(rho))
    gen = as_generator(rng)
    noisy_threshold = threshold + laplace_scalar(THRESHOLD_NOISE / scale, gen)
    for index, query in enumerate(queries):
        if query + laplace_scalar(QUERY_NOISE / scale, gen) > noisy_threshold:
            return index
    return None

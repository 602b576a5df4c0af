import numpy as np

from bench.synthetic import uniform_in_ball


def planted_cluster(n_cluster, n_outliers, d, rng, cluster_radius=0.1, distance=50.0, outlier_radius=100.0):
    """n_cluster points uniform in a small ball at the given distance from the origin, plus uniform outliers."""
    center = np.zeros(d)
    center[0] = distance
    cluster = center + uniform_in_ball(n_cluster, d, cluster_radius, rng)
    outliers = uniform_in_ball(n_outliers, d, outlier_radius, rng)
    return np.vstack([cluster, outliers])

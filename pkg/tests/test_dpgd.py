import math

import numpy as np
import pytest

import config
from errors import InvalidArgumentError
from estimators.dpgd import (
    baseline_schedule,
    dpgd,
    dpgd_baseline,
    dpgd_noise_sigma,
    finetune_schedule,
    loc_dpgd,
    localization,
    warmup_rounds,
)
from geometry.core import Ball, gm_objective, weiszfeld_gm
from privacy.noise import RngStream
from tests.helpers import planted_cluster


@pytest.fixture
def cluster_data():
    return planted_cluster(90, 10, 2, np.random.default_rng(77))


def test_dpgd_flows_to_single_point(noiseless, stream):
    big = Ball.origin(2, 100)
    theta = dpgd((0, 0), [(5, 0)], 1.0, (big, big), eta=0.5, T=50, rng=stream)
    assert np.linalg.norm(theta - (5, 0)) <= 0.5


def test_dpgd_is_attracted_to_the_median(noiseless, stream):
    ball = Ball.origin(1, 10)
    theta = dpgd(2.5, [1, 2, 3, 4, 5], 1.0, (ball, ball), eta=0.05, T=2000, rng=stream)
    assert abs(theta[0] - 3.0) <= 2 * 0.05


def test_dpgd_is_deterministic_under_a_seed():
    data = np.random.default_rng(1).normal(size=(50, 3))
    ball = Ball.origin(3, 10)
    first = dpgd(np.zeros(3), data, 0.5, (ball, ball), 0.1, 40, RngStream(9).child("dpgd"))
    second = dpgd(np.zeros(3), data, 0.5, (ball, ball), 0.1, 40, RngStream(9).child("dpgd"))
    np.testing.assert_array_equal(first, second)


def test_dpgd_rejects_infeasible_start(stream):
    ball = Ball.origin(2, 1)
    with pytest.raises(InvalidArgumentError):
        dpgd((3, 0), [(0, 0)], 1.0, (ball, ball), 0.1, 5, stream)


def test_dpgd_reports_iterates_to_callback(stream):
    seen = []
    ball = Ball.origin(2, 10)
    dpgd((0, 0), [(1, 1), (2, 2)], 1.0, (ball, ball), 0.1, 7, stream, callback=lambda t, theta: seen.append((t, theta.copy())))
    assert [t for t, _ in seen] == list(range(7))
    assert all(theta.shape == (2,) for _, theta in seen)


def test_noisy_iterates_stay_in_both_balls(stream):
    outer, inner = Ball.origin(2, 10), Ball((9.0, 0.0), 3.0)
    data = np.vstack([np.full((20, 2), (20.0, 6.0)), np.full((20, 2), (-8.0, -4.0))])
    iterates = []
    dpgd((8.0, 0.0), data, 0.05, (outer, inner), eta=2.0, T=300, rng=stream,
         callback=lambda t, theta: iterates.append(theta.copy()))
    assert len(iterates) == 300
    for theta in iterates:
        for ball in (outer, inner):
            assert np.linalg.norm(theta - ball.center) <= ball.radius * (1 + 1e-9)
    # the data pulls the iterates onto both boundaries
    assert max(np.linalg.norm(theta) for theta in iterates) >= 10 - 1e-3
    assert max(np.linalg.norm(theta - inner.center) for theta in iterates) >= 3 - 1e-3


def test_noise_sigma_and_conservative_mode(monkeypatch):
    sigma = dpgd_noise_sigma(100, 0.5, 1000)
    assert sigma == pytest.approx(math.sqrt(100 / (2 * 0.5 * 1000 ** 2)))
    monkeypatch.setattr(config, "CONSERVATIVE_DPGD_NOISE", True)
    assert dpgd_noise_sigma(100, 0.5, 1000) == pytest.approx(2 * sigma)


def test_schedules():
    eta, T = baseline_schedule(1000, 10, 1.0, 100.0)
    assert T == 781
    assert eta == pytest.approx(200 * math.sqrt(10 / (12 * 1e6)))
    assert math.sqrt(2 / T) == pytest.approx(16 * math.sqrt(10) / 1000, rel=1e-2)

    eta, T = finetune_schedule(100, 2, 200.0, 0.16)
    assert T == 3906
    assert eta == pytest.approx(50 * 0.16 * math.sqrt(2 / (6 * 200 * 100 ** 2)))
    assert finetune_schedule(10, 5, 0.01, 1.0)[1] == 1


def test_warmup_rounds():
    assert warmup_rounds(100, 100) == 0
    assert warmup_rounds(100, 200) == 0
    assert warmup_rounds(100, 0.16) == 10
    assert warmup_rounds(100, 0.32) == 9


# --- Localization ---

def test_localization_contains_the_median(noiseless, cluster_data):
    theta_star = weiszfeld_gm(cluster_data)
    result = localization(cluster_data, 100.0, r=0.01, beta=0.1, R=100.0, rng=RngStream(0))
    assert not result.failed
    assert result.ball.radius == pytest.approx(25 * result.delta_hat)
    assert result.ball.contains(theta_star)
    assert result.ledger.total_rho == pytest.approx(100.0, rel=1e-12)


def test_localization_radius_recursion(noiseless, cluster_data):
    result = localization(cluster_data, 100.0, r=0.01, beta=0.1, R=100.0, rng=RngStream(0))
    delta_hat = result.delta_hat
    k_wu = warmup_rounds(100.0, delta_hat)
    assert len(result.radii) == k_wu + 1
    for m, rad in enumerate(result.radii):
        closed_form = 100.0 / 2 ** m + 12 * delta_hat * sum(2.0 ** -i for i in range(m))
        assert rad == pytest.approx(closed_form)
    assert result.radii[-1] <= 25 * delta_hat


def test_localization_failure_records_full_budget():
    data = np.array([[1.0, 0.0], [-1.0, 0.0]])
    result = localization(data, 0.01, r=0.1, beta=0.1, R=1.0, rng=RngStream(4))
    assert result.failed and result.ball is None
    np.testing.assert_array_equal(result.theta0, np.zeros(2))
    assert result.ledger.total_rho == pytest.approx(0.01, rel=1e-12)


@pytest.mark.slow
def test_localization_containment_frequency():
    data = planted_cluster(900, 100, 2, np.random.default_rng(5))
    theta_star = weiszfeld_gm(data)
    root = RngStream(11)
    hits = 0
    for t in range(400):
        result = localization(data, 1.0, r=0.01, beta=0.1, R=100.0, rng=root.child("trial", t))
        hits += (not result.failed) and result.ball.contains(theta_star)
    assert hits / 400 >= 1 - 2 * 0.1 - 0.05


# --- End-to-end estimators ---

def test_loc_dpgd_noise_disabled_ratio(noiseless, cluster_data):
    theta_star = weiszfeld_gm(cluster_data)
    result = loc_dpgd(cluster_data, 200.0, r=0.01, beta=0.1, R=100.0, rng=RngStream(0))
    assert not result.failed
    assert gm_objective(result.theta, cluster_data) / gm_objective(theta_star, cluster_data) <= 1.01
    assert result.ledger.total_rho == pytest.approx(200.0, rel=1e-12)


def test_loc_dpgd_is_deterministic(cluster_data):
    first = loc_dpgd(cluster_data, 200.0, r=0.01, beta=0.1, R=100.0, rng=RngStream(8))
    second = loc_dpgd(cluster_data, 200.0, r=0.01, beta=0.1, R=100.0, rng=RngStream(8))
    np.testing.assert_array_equal(first.theta, second.theta)


def test_loc_dpgd_failure_returns_origin():
    data = np.array([[1.0, 0.0], [-1.0, 0.0]])
    result = loc_dpgd(data, 0.01, r=0.1, beta=0.1, R=1.0, rng=RngStream(4))
    assert result.failed
    np.testing.assert_array_equal(result.theta, np.zeros(2))
    assert result.ledger.total_rho == pytest.approx(0.01, rel=1e-12)


def test_loc_dpgd_runs_below_sample_bound():
    data = np.random.default_rng(3).normal(size=(30, 2))
    result = loc_dpgd(data, 0.5, r=0.01, beta=0.1, R=10.0, rng=RngStream(2))
    assert result.theta.shape == (2,)


@pytest.mark.slow
def test_loc_dpgd_ratio_shrinks_as_n_grows():
    d, rho, R = 20, 32.0, 100.0
    root = RngStream(2024)
    medians = []
    for n in (250, 500, 1000):
        ratios = []
        for trial in range(50):
            rng = root.child(f"n={n}", trial)
            data = rng.child("data").generator.standard_normal((n, d))
            result = loc_dpgd(data, rho, r=0.05, beta=0.05, R=R, rng=rng.child("estimate"))
            assert not result.failed
            f_star = gm_objective(weiszfeld_gm(data, tol=config.ORACLE_TOL), data)
            ratios.append(gm_objective(result.theta, data) / f_star)
        assert min(ratios) >= 1 - 1e-9
        medians.append(float(np.median(ratios)))
    assert np.all(np.isfinite(medians))
    assert medians[0] > medians[1] > medians[2]


def test_dpgd_baseline_budget_and_shape(stream):
    data = np.random.default_rng(3).normal(size=(200, 4))
    result = dpgd_baseline(data, 0.8, 10.0, stream)
    assert result.theta.shape == (4,)
    assert np.linalg.norm(result.theta) <= 10.0 + 1e-9
    assert result.ledger.total_rho == 0.8

"""Name-to-estimator dispatch shared by the benchmark runner and the HTTP API."""

import logging
from typing import Callable, Dict

import numpy as np

import config
from errors import InvalidArgumentError
from estimators.cutting_plane import CuttingPlaneConfig, loc_dp_cutting_plane
from estimators.dpgd import dpgd_baseline, loc_dpgd
from estimators.inverse_sensitivity import GridSpec, SInvSMechanism
from estimators.results import EstimateResult
from geometry.core import as_dataset
from privacy.budgets import ApproxDpBudget, ZcdpBudget
from privacy.ledger import PrivacyLedger
from privacy.noise import RngStream

logger = logging.getLogger(__name__)


def _run_dpgd_baseline(data, R, r, beta, rho, approx, rng):
    return dpgd_baseline(data, rho, R, rng)


def _run_loc_dpgd(data, R, r, beta, rho, approx, rng):
    return loc_dpgd(data, rho, r, beta, R, rng)


def _run_cutting_plane(data, R, r, beta, rho, approx, rng):
    return loc_dp_cutting_plane(data, CuttingPlaneConfig(budget=approx), r, beta, R, rng)


def _run_sinvs(data, R, r, beta, rho, approx, rng):
    points = as_dataset(data)
    d = points.shape[1]
    mode = "exact" if d == 1 or points.shape[0] <= config.SINVS_EXACT_MAX_N else "greedy"
    mechanism = SInvSMechanism(points, approx.epsilon, GridSpec(R=R, spacing=r, d=d), mode=mode)
    ledger = PrivacyLedger()
    ledger.spend_pure("sinvs", approx.epsilon)
    theta = mechanism.sample(rng.child("sinvs"))
    return EstimateResult(theta=np.asarray(theta, dtype=float), failed=False, ledger=ledger, details={"len_mode": mode})


ESTIMATORS: Dict[str, Callable[..., EstimateResult]] = {
    "dpgd-baseline": _run_dpgd_baseline,
    "loc-dpgd": _run_loc_dpgd,
    "loc-cutting-plane": _run_cutting_plane,
    "sinvs": _run_sinvs,
}


def run_estimator(
    algorithm: str,
    data,
    *,
    R: float,
    r: float,
    beta: float,
    rho: ZcdpBudget,
    approx: ApproxDpBudget,
    rng: RngStream,
) -> EstimateResult:
    """Runs one named estimator; zCDP estimators use rho, the others the (epsilon, delta) budget."""
    try:
        estimator = ESTIMATORS[algorithm]
    except KeyError:
        raise InvalidArgumentError(f"Unknown algorithm {algorithm!r}; expected one of {sorted(ESTIMATORS)}.") from None
    logger.debug("Running %s with R=%g.", algorithm, R)
    return estimator(data, R, r, beta, rho, approx, rng)

import logging

import numpy as np
from fastapi import APIRouter, HTTPException, status

import config
from errors import ConvergenceError, InvalidArgumentError
from estimators.pipelines import run_estimator
from models.experiment import BudgetEntry
from models.median import MedianRequest, MedianResponse
from privacy.budgets import ApproxDpBudget, ZcdpBudget, approx_dp_from_zcdp, zcdp_from_approx_dp
from privacy.noise import RngSeed

logger = logging.getLogger(__name__)

router = APIRouter()


def resolve_budgets(request: MedianRequest):
    """zCDP and (epsilon, delta) budgets for a request, one derived from the other."""
    if request.rho is not None:
        rho = ZcdpBudget(rho=request.rho)
        return rho, approx_dp_from_zcdp(rho, request.delta)
    approx = ApproxDpBudget(epsilon=request.epsilon or config.DEFAULT_EPSILON, delta=request.delta)
    return zcdp_from_approx_dp(approx), approx


# Plain def: estimators are CPU-bound and run in FastAPI's thread pool.
@router.post("/median", response_model=MedianResponse, tags=["Estimators"])
def private_median(request: MedianRequest) -> MedianResponse:
    rho, approx = resolve_budgets(request)
    try:
        result = run_estimator(
            request.algorithm, np.asarray(request.points, dtype=float),
            R=request.R, r=request.r, beta=request.beta, rho=rho, approx=approx,
            rng=RngSeed(seed=request.seed).stream(),
        )
    except InvalidArgumentError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except ConvergenceError as e:
        logger.error("Estimator did not converge: %s", e)
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail="Estimator did not converge.")

    return MedianResponse(
        theta=[float(x) for x in result.theta],
        failed=result.failed,
        delta_hat=result.delta_hat,
        budget_rho=result.ledger.total_rho,
        budget_pure_epsilon=result.ledger.total_pure_epsilon,
        budget_trace=[BudgetEntry(**record) for record in result.ledger.to_records()],
    )

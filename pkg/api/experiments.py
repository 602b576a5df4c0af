import logging

from fastapi import APIRouter, HTTPException, status
from pydantic import ValidationError

from bench.runner import run_experiment
from errors import InvalidArgumentError
from models.experiment import ExperimentConfig, RunReport

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/experiments", response_model=RunReport, tags=["Experiments"])
def create_experiment(cfg: ExperimentConfig) -> RunReport:
    """Runs an R-sweep synchronously and returns the full report; nothing is written to disk."""
    if cfg.data_path is not None or cfg.output is not None:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail="data_path and output are only available from the command line.",
        )
    try:
        return run_experiment(cfg)
    except (InvalidArgumentError, ValidationError) as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))

from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

import config
from models.experiment import Algorithm, BudgetEntry, check_single_budget, check_sinvs_limits


class MedianRequest(BaseModel):
    """A private geometric-median query over the supplied points."""

    points: List[List[float]]
    algorithm: Algorithm = "loc-dpgd"
    R: float = Field(..., gt=0)
    r: float = Field(config.DEFAULT_R_FLOOR, gt=0)
    beta: float = Field(config.DEFAULT_BETA, gt=0, le=1)
    epsilon: Optional[float] = Field(None, gt=0)
    delta: float = Field(config.DEFAULT_DELTA, gt=0, lt=1)
    rho: Optional[float] = Field(None, gt=0)
    seed: int = Field(config.DEFAULT_SEED, ge=0, lt=2 ** 64)

    @field_validator('points')
    @classmethod
    def points_must_be_rectangular(cls, value: List[List[float]]) -> List[List[float]]:
        if not value:
            raise ValueError("points must not be empty")
        width = len(value[0])
        if width == 0 or any(len(p) != width for p in value):
            raise ValueError("every point must have the same non-zero dimension")
        return value

    @model_validator(mode='after')
    def check_consistency(self) -> 'MedianRequest':
        check_single_budget(self.epsilon, self.rho)
        if self.algorithm == "sinvs":
            check_sinvs_limits(len(self.points), len(self.points[0]), self.R, self.r)
        return self


class MedianResponse(BaseModel):
    theta: List[float]
    failed: bool
    delta_hat: Optional[float] = None
    budget_rho: float
    budget_pure_epsilon: float
    budget_trace: List[BudgetEntry]

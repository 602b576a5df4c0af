from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

import config
from privacy.budgets import (
    ApproxDpBudget,
    ZcdpBudget,
    approx_dp_from_zcdp,
    zcdp_from_approx_dp,
)

Algorithm = Literal["dpgd-baseline", "loc-dpgd", "loc-cutting-plane", "sinvs"]
ReportFormat = Literal["csv", "json"]


def check_single_budget(epsilon: Optional[float], rho: Optional[float]) -> None:
    if epsilon is not None and rho is not None:
        raise ValueError("give either epsilon or rho, not both")


def check_sinvs_limits(n: int, d: int, R: float, r: float) -> None:
    """Rejects lattice grids the inverse-sensitivity sampler cannot enumerate."""
    if d > config.SINVS_MAX_DIM:
        raise ValueError(f"sinvs supports d <= {config.SINVS_MAX_DIM}")
    if d > 1 and n > config.SINVS_EXACT_MAX_N:
        raise ValueError(f"sinvs in d > 1 needs n <= {config.SINVS_EXACT_MAX_N}")
    if (2 * R / r + 1) ** d > config.SINVS_MAX_NODES:
        raise ValueError(f"sinvs grid would exceed {config.SINVS_MAX_NODES} nodes")


class ExperimentConfig(BaseModel):
    """Settings for one R-sweep experiment."""

    n: int = Field(config.DEFAULT_N, ge=10)
    d: int = Field(config.DEFAULT_D, ge=1)
    sweep_R: List[float] = Field(default_factory=lambda: list(config.DEFAULT_SWEEP_R))
    r: float = Field(config.DEFAULT_R_FLOOR, gt=0)
    epsilon: Optional[float] = Field(None, gt=0)
    delta: float = Field(config.DEFAULT_DELTA, gt=0, lt=1)
    rho: Optional[float] = Field(None, gt=0)
    beta: float = Field(config.DEFAULT_BETA, gt=0, le=1)
    reps: int = Field(config.DEFAULT_REPS, ge=1)
    algorithms: List[Algorithm] = Field(default_factory=lambda: ["dpgd-baseline", "loc-dpgd"])
    seed: int = Field(config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    stream_id: int = Field(0, ge=0)
    output: Optional[Path] = None
    format: ReportFormat = "csv"
    data_path: Optional[Path] = None
    workers: int = Field(1, ge=1)
    record_timing: bool = True

    @field_validator('sweep_R')
    @classmethod
    def radii_must_be_positive(cls, value: List[float]) -> List[float]:
        if any(not R > 0 for R in value):
            raise ValueError("every R in the sweep must be positive")
        return value

    @field_validator('algorithms')
    @classmethod
    def algorithms_must_be_distinct(cls, value: List[str]) -> List[str]:
        if len(set(value)) != len(value):
            raise ValueError("algorithms must not repeat")
        return value

    @model_validator(mode='after')
    def check_consistency(self) -> 'ExperimentConfig':
        if self.sweep_R and not self.r < min(self.sweep_R):
            raise ValueError("r must be smaller than every R in the sweep")
        check_single_budget(self.epsilon, self.rho)
        if self.epsilon is None and self.rho is None:
            self.epsilon = config.DEFAULT_EPSILON
        if "sinvs" in self.algorithms:
            check_sinvs_limits(self.n, self.d, max(self.sweep_R, default=self.r), self.r)
        return self

    def zcdp_budget(self) -> ZcdpBudget:
        if self.rho is not None:
            return ZcdpBudget(rho=self.rho)
        return zcdp_from_approx_dp(self.approx_budget())

    def approx_budget(self) -> ApproxDpBudget:
        if self.epsilon is not None:
            return ApproxDpBudget(epsilon=self.epsilon, delta=self.delta)
        return approx_dp_from_zcdp(self.rho, self.delta)


class BudgetEntry(BaseModel):
    stage: str
    kind: Literal["zcdp", "pure"]
    amount: float


class RunRow(BaseModel):
    """One (algorithm, R, rep) result."""

    algorithm: Algorithm
    R: float
    rep: int
    objective: float
    oracle_objective: float
    ratio: float
    wall_ms: float
    failed: bool
    seed: int
    delta_hat: Optional[float] = None
    budget_rho: float = 0.0
    budget_pure_epsilon: float = 0.0
    budget_trace: List[BudgetEntry] = Field(default_factory=list)


class AggregateRow(BaseModel):
    algorithm: Algorithm
    R: float
    mean_ratio: float
    median_ratio: float
    failures: int
    reps: int


class RunReport(BaseModel):
    """Rows, per-(algorithm, R) aggregates and the configuration that produced them."""

    version: str = config.VERSION
    config: ExperimentConfig
    rows: List[RunRow] = Field(default_factory=list)
    aggregates: List[AggregateRow] = Field(default_factory=list)

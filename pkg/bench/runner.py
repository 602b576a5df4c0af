"""
Runs an R-sweep experiment: every algorithm on every (rep, R) pair, scored
against a non-private Weiszfeld oracle on the same clipped dataset.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
import pandas as pd

import config
from bench.synthetic import generate_synthetic
from errors import ConvergenceError
from estimators.pipelines import run_estimator
from geometry.core import Dataset, clip_to_ball, gm_objective, weiszfeld_gm
from geometry.loader import load_dataset_csv
from models.experiment import AggregateRow, BudgetEntry, ExperimentConfig, RunReport, RunRow
from privacy.noise import RngStream

logger = logging.getLogger(__name__)


def oracle_median(data: Dataset) -> np.ndarray:
    try:
        return weiszfeld_gm(data, tol=config.ORACLE_TOL)
    except ConvergenceError as exc:
        logger.warning("Oracle did not converge; scoring against its best iterate.")
        return exc.best_iterate


def objective_ratio(objective: float, oracle_objective: float) -> float:
    if oracle_objective > 0:
        return objective / oracle_objective
    return 1.0 if objective <= 0 else math.inf


def _run_rep(cfg: ExperimentConfig, rep: int, root: RngStream, shared: Optional[Dataset]) -> List[RunRow]:
    rep_rng = root.child("rep", rep)
    data = shared if shared is not None else generate_synthetic(cfg.n, cfg.d, rep_rng.child("data"))
    rho, approx = cfg.zcdp_budget(), cfg.approx_budget()
    rows: List[RunRow] = []

    for R_index, R in enumerate(cfg.sweep_R):
        clipped = clip_to_ball(data, R)
        oracle_objective = gm_objective(oracle_median(clipped), clipped)
        for algorithm in cfg.algorithms:
            start = time.perf_counter()
            result = run_estimator(
                algorithm, clipped,
                R=R, r=cfg.r, beta=cfg.beta, rho=rho, approx=approx,
                rng=rep_rng.child(algorithm, R_index),
            )
            wall_ms = (time.perf_counter() - start) * 1000.0 if cfg.record_timing else 0.0
            if result.failed:
                logger.warning("%s reported Fail at R=%g, rep %d; scoring the origin.", algorithm, R, rep)
            objective = gm_objective(result.theta, clipped)
            rows.append(RunRow(
                algorithm=algorithm,
                R=R,
                rep=rep,
                objective=objective,
                oracle_objective=oracle_objective,
                ratio=objective_ratio(objective, oracle_objective),
                wall_ms=wall_ms,
                failed=result.failed,
                seed=cfg.seed,
                delta_hat=result.delta_hat,
                budget_rho=result.ledger.total_rho,
                budget_pure_epsilon=result.ledger.total_pure_epsilon,
                budget_trace=[BudgetEntry(**record) for record in result.ledger.to_records()],
            ))
    logger.info("Finished rep %d of %d.", rep + 1, cfg.reps)
    return rows


def aggregate_rows(rows: List[RunRow]) -> List[AggregateRow]:
    """Mean and median ratio and failure count per (algorithm, R), in first-seen order."""
    if not rows:
        return []
    frame = pd.DataFrame([row.model_dump(include={"algorithm", "R", "ratio", "failed"}) for row in rows])
    grouped = frame.groupby(["algorithm", "R"], sort=False).agg(
        mean_ratio=("ratio", "mean"),
        median_ratio=("ratio", "median"),
        failures=("failed", "sum"),
        reps=("ratio", "size"),
    ).reset_index()
    return [
        AggregateRow(
            algorithm=rec["algorithm"],
            R=float(rec["R"]),
            mean_ratio=float(rec["mean_ratio"]),
            median_ratio=float(rec["median_ratio"]),
            failures=int(rec["failures"]),
            reps=int(rec["reps"]),
        )
        for rec in grouped.to_dict(orient="records")
    ]


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    root = RngStream(cfg.seed, cfg.stream_id)
    shared = load_dataset_csv(cfg.data_path) if cfg.data_path is not None else None
    if shared is not None:
        logger.info("Loaded %d points in %d dimensions from %s.", shared.shape[0], shared.shape[1], cfg.data_path)
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), "n": shared.shape[0], "d": shared.shape[1]})

    logger.info(
        "Running %s over R=%s with %d reps on %d worker(s).",
        ", ".join(cfg.algorithms), cfg.sweep_R, cfg.reps, cfg.workers,
    )
    if cfg.workers == 1:
        per_rep = [_run_rep(cfg, rep, root, shared) for rep in range(cfg.reps)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            per_rep = list(pool.map(lambda rep: _run_rep(cfg, rep, root, shared), range(cfg.reps)))

    rows = [row for rep_rows in per_rep for row in rep_rows]
    return RunReport(config=cfg, rows=rows, aggregates=aggregate_rows(rows))

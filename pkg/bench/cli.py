"""
Command-line entry point for R-sweep experiments.

    python -m bench.cli --n 1000 --d 10 --sweep-R 100 1000 10000 --eps 1 --out results/run.csv

Exit codes: 0 on success, 2 for an invalid configuration, 3 for I/O failures.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

import config
from bench.report import emit_report
from bench.runner import run_experiment
from errors import InvalidArgumentError
from models.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

# flag dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "n": "n",
    "d": "d",
    "sweep_R": "sweep_R",
    "r": "r",
    "eps": "epsilon",
    "delta": "delta",
    "rho": "rho",
    "beta": "beta",
    "reps": "reps",
    "algos": "algorithms",
    "seed": "seed",
    "out": "output",
    "format": "format",
    "data": "data_path",
    "workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m bench.cli",
        description="Run private geometric-median estimators over a sweep of data radii R.",
    )
    parser.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields; flags override it.")
    parser.add_argument("--n", type=int, help="Number of synthetic points.")
    parser.add_argument("--d", type=int, help="Dimension of synthetic points.")
    parser.add_argument("--sweep-R", dest="sweep_R", type=float, nargs="+", help="Radii R to sweep.")
    parser.add_argument("--r", type=float, help="Lower bound r on the quantile radius.")
    parser.add_argument("--eps", type=float, help="Approximate-DP epsilon.")
    parser.add_argument("--delta", type=float, help="Approximate-DP delta.")
    parser.add_argument("--rho", type=float, help="zCDP budget; used instead of --eps when given alone.")
    parser.add_argument("--beta", type=float, help="Failure probability.")
    parser.add_argument("--reps", type=int, help="Repetitions per (algorithm, R).")
    parser.add_argument("--algos", nargs="+", choices=config.ALGORITHMS, help="Algorithms to run.")
    parser.add_argument("--seed", type=int, help="Root seed.")
    parser.add_argument("--out", type=Path, help="Report path; the report goes to stdout when omitted.")
    parser.add_argument("--format", choices=["csv", "json"], help="Report format.")
    parser.add_argument("--data", type=Path, help="CSV dataset to use instead of synthetic data.")
    parser.add_argument("--workers", type=int, help="Threads running repetitions concurrently.")
    parser.add_argument("--no-timing", dest="record_timing", action="store_false", default=None,
                        help="Record wall_ms as 0 so reports are byte-identical across runs.")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="Logging level.")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merges the optional JSON config file with the flags that were given."""
    fields: Dict[str, Any] = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as handle:
            try:
                loaded = json.load(handle)
            except json.JSONDecodeError as exc:
                raise InvalidArgumentError(f"Config file {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InvalidArgumentError(f"Config file {args.config} must hold a JSON object, got {type(loaded).__name__}.")
        fields.update(loaded)
    for flag, field in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            fields[field] = value
    # a budget flag replaces the file's budget of the other kind
    if args.eps is not None and args.rho is None:
        fields.pop("rho", None)
    if args.rho is not None and args.eps is None:
        fields.pop("epsilon", None)
    if args.record_timing is not None:
        fields["record_timing"] = args.record_timing
    return ExperimentConfig(**fields)


def print_aggregates(report) -> None:
    frame = pd.DataFrame([agg.model_dump() for agg in report.aggregates])
    if not frame.empty:
        print(frame.to_string(index=False))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(args)
    except (ValidationError, InvalidArgumentError, TypeError, ValueError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error("Could not read config file: %s", exc)
        return EXIT_IO

    try:
        report = run_experiment(cfg)
    except (ValidationError, InvalidArgumentError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error("Could not read dataset: %s", exc)
        return EXIT_IO

    try:
        text = emit_report(report, cfg.format, cfg.output)
    except OSError as exc:
        logger.error("Could not write report: %s", exc)
        return EXIT_IO

    if cfg.output is None:
        sys.stdout.write(text)
    else:
        print_aggregates(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

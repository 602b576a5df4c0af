"""CSV and JSON writers for experiment reports."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Literal, Optional, Union

import pandas as pd

import config
from errors import InvalidArgumentError
from models.experiment import RunReport

logger = logging.getLogger(__name__)


def round_significant(value: float, digits: int = config.SIGNIFICANT_DIGITS) -> float:
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return round_significant(obj)
    if isinstance(obj, dict):
        return {key: _round_floats(value) for key, value in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(value) for value in obj]
    return obj


def report_to_csv(report: RunReport) -> str:
    frame = pd.DataFrame(
        [row.model_dump(include=set(config.CSV_COLUMNS)) for row in report.rows],
        columns=config.CSV_COLUMNS,
    )
    return frame.to_csv(index=False, float_format=f"%.{config.SIGNIFICANT_DIGITS}g", lineterminator="\n")


def report_to_json(report: RunReport) -> str:
    payload = _round_floats(report.model_dump(mode="json"))
    return json.dumps(payload, indent=2) + "\n"


def render_report(report: RunReport, fmt: Literal["csv", "json"]) -> str:
    if fmt == "csv":
        return report_to_csv(report)
    if fmt == "json":
        return report_to_json(report)
    raise InvalidArgumentError(f"Unknown report format {fmt!r}; expected 'csv' or 'json'.")


def emit_report(report: RunReport, fmt: Literal["csv", "json"], path: Optional[Union[str, Path]] = None) -> str:
    """Renders the report and writes it to path when one is given; returns the text."""
    text = render_report(report, fmt)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("Wrote %d rows to %s.", len(report.rows), path)
    return text

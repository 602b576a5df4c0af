"""CSV ingestion for datasets: one point per row, comma-separated, no header."""

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from errors import InvalidArgumentError
from geometry.core import Dataset, as_dataset


def load_dataset_csv(path: Union[str, Path]) -> Dataset:
    """Loads a headerless CSV of points, rejecting ragged or non-numeric rows."""
    try:
        frame = pd.read_csv(path, header=None, dtype=float, skip_blank_lines=True, float_precision="round_trip")
    except pd.errors.EmptyDataError as exc:
        raise InvalidArgumentError(f"Dataset file {path} is empty.") from exc
    except pd.errors.ParserError as exc:
        raise InvalidArgumentError(f"Dataset file {path} has ragged rows: {exc}") from exc
    except ValueError as exc:
        raise InvalidArgumentError(f"Dataset file {path} has non-numeric fields: {exc}") from exc

    if frame.isna().any().any():
        bad_rows = frame.index[frame.isna().any(axis=1)].tolist()
        raise InvalidArgumentError(f"Dataset file {path} has ragged rows at {bad_rows[:5]}.")
    return as_dataset(frame.to_numpy())


def save_dataset_csv(data, path: Union[str, Path]) -> None:
    points = as_dataset(data)
    pd.DataFrame(points).to_csv(path, header=False, index=False, float_format="%.17g")

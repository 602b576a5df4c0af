"""Exception types shared by the geometry, privacy and estimator packages."""

from typing import Optional

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when an input violates an operation's precondition."""


class SizeLimitError(InvalidArgumentError):
    """Raised when an exact computation is requested beyond its size limit."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its budget before reaching tolerance."""

    def __init__(self, message: str, best_iterate: Optional[np.ndarray] = None):
        super().__init__(message)
        self.best_iterate = best_iterate


class RegionEmptyError(RuntimeError):
    """Raised when a cutting-plane region has no strictly feasible point."""


class EstimationError(RuntimeError):
    """Raised when a Monte Carlo estimate has no accepted samples."""

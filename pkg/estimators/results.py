"""Result containers shared by the end-to-end estimators."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from geometry.core import Ball
from privacy.ledger import PrivacyLedger


@dataclass
class LocalizationResult:
    """Warm-start centre and the localized ball B(theta0, 25 * delta_hat)."""

    theta0: np.ndarray
    delta_hat: Optional[float]
    ball: Optional[Ball]
    failed: bool
    radii: List[float] = field(default_factory=list)
    ledger: PrivacyLedger = field(default_factory=PrivacyLedger)


@dataclass
class EstimateResult:
    """Output of an end-to-end private estimator; theta is the origin on failure."""

    theta: np.ndarray
    failed: bool
    ledger: PrivacyLedger
    delta_hat: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

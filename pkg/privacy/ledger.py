"""Running record of the privacy budget spent by each stage of an algorithm."""

import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional

from errors import InvalidArgumentError

Kind = Literal["zcdp", "pure"]


@dataclass(frozen=True)
class LedgerEntry:
    stage: str
    kind: Kind
    amount: float


class PrivacyLedger:
    """Ordered ledger; zCDP spends add up exactly, pure-DP spends are kept apart."""

    def __init__(self):
        self.entries: List[LedgerEntry] = []

    def spend_zcdp(self, stage: str, rho: float) -> float:
        if rho < 0 or not math.isfinite(rho):
            raise InvalidArgumentError(f"Cannot record rho={rho} for stage {stage}.")
        self.entries.append(LedgerEntry(stage, "zcdp", float(rho)))
        return rho

    def spend_pure(self, stage: str, epsilon: float) -> float:
        if epsilon < 0 or not math.isfinite(epsilon):
            raise InvalidArgumentError(f"Cannot record epsilon={epsilon} for stage {stage}.")
        self.entries.append(LedgerEntry(stage, "pure", float(epsilon)))
        return epsilon

    def extend(self, other: "PrivacyLedger", prefix: Optional[str] = None) -> None:
        for entry in other.entries:
            stage = f"{prefix}/{entry.stage}" if prefix else entry.stage
            self.entries.append(LedgerEntry(stage, entry.kind, entry.amount))

    @property
    def total_rho(self) -> float:
        return math.fsum(e.amount for e in self.entries if e.kind == "zcdp")

    @property
    def total_pure_epsilon(self) -> float:
        return math.fsum(e.amount for e in self.entries if e.kind == "pure")

    def to_records(self) -> List[Dict]:
        return [{"stage": e.stage, "kind": e.kind, "amount": e.amount} for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

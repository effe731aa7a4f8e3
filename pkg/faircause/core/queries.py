"""Causal effect queries."""
import math
from dataclasses import dataclass

from faircause.exceptions import ConfigError


@dataclass(frozen=True)
class AteQuery:
    """ATE of `treatment` on `outcome` between do(treatment=x1) and do(treatment=x2)."""

    treatment: str
    outcome: str
    x1: float = 1.0
    x2: float = 0.0

    def __post_init__(self) -> None:
        if self.treatment == self.outcome:
            raise ConfigError(f"treatment and outcome are both {self.treatment!r}")
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise ConfigError("x1 and x2 must be finite")

    def reversed(self) -> "AteQuery":
        """The same query with the two arms exchanged."""
        return AteQuery(self.treatment, self.outcome, self.x2, self.x1)

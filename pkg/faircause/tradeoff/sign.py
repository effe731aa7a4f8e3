"""Judging whether a metric change is an improvement."""
from __future__ import annotations

from enum import Enum

from faircause.core import Objective, SignSpec


class Sign(str, Enum):
    """Improvement, downgrade, or no change within the neutral band."""

    PLUS = "+"
    MINUS = "-"
    NEUTRAL = "0"

    def opposes(self, other: Sign) -> bool:
        """Strictly opposite: one Plus and one Minus."""
        return {self, other} == {Sign.PLUS, Sign.MINUS}


def sign(spec: SignSpec, value: float, delta: float) -> Sign:
    """Sign of changing a metric from `value` by `delta`."""
    band = spec.neutral_band
    if spec.objective is Objective.TARGET:
        before = abs(value - spec.target)  # type: ignore[operator]
        after = abs(value + delta - spec.target)  # type: ignore[operator]
        if after < before - band:
            return Sign.PLUS
        if after > before + band:
            return Sign.MINUS
        return Sign.NEUTRAL

    if spec.objective is Objective.MINIMIZE:
        delta = -delta
    if delta > band:
        return Sign.PLUS
    if delta < -band:
        return Sign.MINUS
    return Sign.NEUTRAL

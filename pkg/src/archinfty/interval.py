"""Closed intervals of reals and three-valued verdicts on strict inequalities."""

from __future__ import annotations

import enum
import math
from typing import NamedTuple


class Verdict(str, enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    INDETERMINATE = "INDETERMINATE"

    def __str__(self) -> str:
        return self.value


class Interval(NamedTuple):
    """A closed interval ``[lower, upper]``; ``upper`` may be ``inf``."""

    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        if math.isinf(self.upper):
            return self.lower
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float, rtol: float = 0.0) -> bool:
        slack = rtol * abs(x)
        return self.lower - slack <= x <= self.upper + slack

    def scale(self, c: float) -> "Interval":
        """Multiply by a non-negative constant."""
        if c < 0:
            raise ValueError("scale factor must be non-negative")
        if c == 0:
            return Interval(0.0, 0.0)
        return Interval(c * self.lower, c * self.upper)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))


def below(value: Interval, threshold: float) -> Verdict:
    """Decide ``value < threshold`` when value is only known to lie in an interval.

    HOLDS if the whole interval is strictly below, FAILS if its lower end is
    at or above the threshold, INDETERMINATE otherwise.
    """
    if value.upper < threshold:
        return Verdict.HOLDS
    if value.lower >= threshold:
        return Verdict.FAILS
    return Verdict.INDETERMINATE


def below_interval(value: Interval, threshold: Interval) -> Verdict:
    """Decide ``value < threshold`` when both sides are intervals."""
    if value.upper < threshold.lower:
        return Verdict.HOLDS
    if value.lower >= threshold.upper:
        return Verdict.FAILS
    return Verdict.INDETERMINATE

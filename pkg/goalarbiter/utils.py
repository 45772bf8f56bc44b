"""Utility functions for goalarbiter"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import SupportsFloat as Numeric

from goalarbiter.definitions import TOLERANCE


def clamp(value: Numeric, low: Numeric, high: Numeric) -> float:
    """Clip value into the closed interval [low, high]"""
    value = float(value)
    if value < low:
        return float(low)
    if value > high:
        return float(high)
    return value


def mean(values: Sequence[Numeric]) -> float:
    """Arithmetic mean, using fsum so that the result does not depend on the order of values"""
    if not values:
        raise ValueError("mean of an empty sequence")
    floats = [float(x) for x in values]
    # The rounded quotient can land one ulp outside the inputs
    return clamp(math.fsum(floats) / len(floats), min(floats), max(floats))


def numbers_close(first: Numeric, second: Numeric, tolerance: float = TOLERANCE) -> bool:
    """Absolute comparison of two numbers; infinities only match themselves"""
    first, second = float(first), float(second)
    if math.isinf(first) or math.isinf(second):
        return first == second
    return abs(first - second) <= tolerance


def json_number(value: Numeric) -> int | float:
    """
    Present integral floats as ints so that documents read naturally, e.g. 23 rather than 23.0.
    Non-finite values are returned unchanged.
    """
    value = float(value)
    if math.isfinite(value) and value.is_integer():
        return int(value)
    return value

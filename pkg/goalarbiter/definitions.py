"""Enums and constants used by goalarbiter"""

import operator
from enum import Enum


class Season(Enum):
    """Seasons recognised by the context-aware mediation policies"""

    WINTER = "winter"
    AUTUMN = "autumn"
    SPRING = "spring"
    SUMMER = "summer"


class PolicyKind(Enum):
    """Stages of the reaction a policy can be attached to"""

    MEDIATION = "mediation"
    ACTUATION = "actuation"
    VALIDATION = "validation"


class Combiner(Enum):
    """How raw settings for a shared actuator are combined"""

    MAX = "max"
    MIN = "min"

    def combine(self, values):
        if self is Combiner.MAX:
            return max(values)
        return min(values)


class Comparison(Enum):
    """Infix comparisons available in the policy language"""

    EQ = "=="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def function(self):
        return _COMPARISON_FUNCTIONS[self]


_COMPARISON_FUNCTIONS = {
    Comparison.EQ: operator.eq,
    Comparison.NE: operator.ne,
    Comparison.LT: operator.lt,
    Comparison.LE: operator.le,
    Comparison.GT: operator.gt,
    Comparison.GE: operator.ge,
}

# Seasonal temperature bounds in degrees Celsius
COLD_SEASONS = (Season.WINTER, Season.AUTUMN)
COLD_SEASON_TEMP = (18.0, 22.0)
WARM_SEASON_TEMP = (24.0, 28.0)

# Brightness is on a 0-255 scale
LIGHT_MAX = 255.0
LIGHT_MIN = 100.0
LIGHT_MIN_DULL = 180.0
BRIGHT_THRESHOLD = 100.0

BINARY_ON = 100.0
BINARY_OFF = 0.0

MIN_FLOAT = float("-inf")
MAX_FLOAT = float("inf")

TOLERANCE = 1e-9

"""
Rules for the global constraints an administrator imposes on mediated values,
i.e. the bounds that settle user-admin conflicts.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence

from goalarbiter.definitions import (
    BRIGHT_THRESHOLD,
    COLD_SEASON_TEMP,
    COLD_SEASONS,
    LIGHT_MAX,
    LIGHT_MIN,
    LIGHT_MIN_DULL,
    WARM_SEASON_TEMP,
    PolicyKind,
    Season,
)
from goalarbiter.errors import PolicyEvaluationError, UnknownPolicyCombinationError

from .rules import BaseRule, NotApplicable, check_applicable

logger = logging.getLogger(__name__)


class BoundRule(BaseRule, ABC):
    """
    Clip a candidate value into an interval that depends on the zone policy, the
    property type, the sensed value of the property instance and the season.
    """

    kind = PolicyKind.MEDIATION

    @abstractmethod
    def bounds(
        self, property_type: str, policy_id: str | None, sensed_value: float | None, season: Season | None
    ) -> tuple[float, float]:
        """Return the closed interval a value must lie in"""

    def apply(
        self,
        property_type: str,
        policy_id: str | None,
        sensed_value: float | None,
        candidate: float,
        season: Season | None,
    ) -> float:
        """Check whether the candidate should be clipped by the bounds"""
        low, high = self.bounds(property_type, policy_id, sensed_value, season)

        if candidate < low:
            logger.debug("Lower bound of %s exceeded, changing value %s to %s", self.name, candidate, low)
            return low

        if candidate > high:
            logger.debug("Upper bound of %s exceeded, changing value %s to %s", self.name, candidate, high)
            return high

        return float(candidate)


class SeasonalTemperatureRule(BoundRule):
    """Temperatures are kept within season dependent ranges in every wing"""

    name = "seasonal_temperature"
    property_types = ["temp"]

    @check_applicable
    def bounds(self, property_type, policy_id, sensed_value, season):
        if season is None:
            raise PolicyEvaluationError(f"{self.name} needs the season to be set in the context")
        if season in COLD_SEASONS:
            return COLD_SEASON_TEMP
        return WARM_SEASON_TEMP


class EastLightRule(BoundRule):
    name = "east_light"
    property_types = ["light"]
    policy_ids = ["east"]

    @check_applicable
    def bounds(self, property_type, policy_id, sensed_value, season):
        return (LIGHT_MIN, LIGHT_MAX)


class WestLightRule(BoundRule):
    """
    The west wing lets rooms be dimmer when it is already bright outside, as
    measured by the brightness sensor of the property instance.
    """

    name = "west_light"
    property_types = ["light"]
    policy_ids = ["west"]

    @check_applicable
    def bounds(self, property_type, policy_id, sensed_value, season):
        if sensed_value is None:
            raise PolicyEvaluationError(f"{self.name} needs a brightness reading for the property instance")
        if sensed_value > BRIGHT_THRESHOLD:
            return (LIGHT_MIN, LIGHT_MAX)
        return (LIGHT_MIN_DULL, LIGHT_MAX)


BOUND_RULES: tuple[BoundRule, ...] = (SeasonalTemperatureRule(), EastLightRule(), WestLightRule())


def select_bound_rule(
    policy_id: str | None, property_type: str, rules: Sequence[BoundRule] = BOUND_RULES
) -> BoundRule:
    """The first rule applicable to the zone policy and property type"""
    for rule in rules:
        if rule.is_applicable(property_type, policy_id):
            return rule
    raise UnknownPolicyCombinationError(
        f"no bound rule for policy '{policy_id}' and property type '{property_type}'",
        [{"policy": policy_id, "property_type": property_type}],
    )


def active_bounds(
    policy_id: str | None,
    property_type: str,
    sensed_value: float | None,
    season: Season | None,
    rules: Sequence[BoundRule] = BOUND_RULES,
) -> tuple[float, float]:
    """The interval find_value() will clip into"""
    rule = select_bound_rule(policy_id, property_type, rules)
    return rule.bounds(property_type, policy_id, sensed_value, season)


def find_value(
    policy_id: str | None,
    property_type: str,
    sensed_value: float | None,
    candidate: float,
    season: Season | None,
    rules: Sequence[BoundRule] = BOUND_RULES,
) -> float:
    """
    Reconcile a candidate value with the global constraints, e.g.

        find_value("east", "temp", None, 28, Season.WINTER) == 22
        find_value("west", "light", 160, 255, Season.WINTER) == 255
    """
    rule = select_bound_rule(policy_id, property_type, rules)
    try:
        return rule.apply(property_type, policy_id, sensed_value, candidate, season)
    except NotApplicable as exc:
        raise UnknownPolicyCombinationError(str(exc)) from exc

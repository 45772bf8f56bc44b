"""
Rules to turn target values into actuator settings and to settle actuators
shared by several property instances.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence

from goalarbiter.definitions import MAX_FLOAT, MIN_FLOAT, Combiner, Season
from goalarbiter.errors import EmptyActuatorListError
from goalarbiter.model import Actuator, BinarySetting, PropertyInstance
from goalarbiter.utils import clamp

from .rules import Action, ActuationPlan, ActuationRule, ConflictRule, MediatedRequest

logger = logging.getLogger(__name__)


def threshold_binary(target: float, actuator: str, setting: BinarySetting | None = None) -> Action:
    """Switch a binary actuator on for a positive target, off otherwise"""
    setting = setting if setting is not None else BinarySetting()
    return Action(actuator, setting.on if target > 0 else setting.off)


def split_equal(
    target: float, actuators: Sequence[str], binary: Mapping[str, BinarySetting] | None = None
) -> list[Action]:
    """
    Divide the target equally between the actuators of a property instance.

    Binary actuators, those listed in `binary`, still count towards the number of
    shares but are switched by `threshold_binary()` instead of taking a share.
    """
    if not actuators:
        raise EmptyActuatorListError("cannot split a target across no actuators")

    binary = binary or {}
    share = target / len(actuators)
    actions = []
    for actuator in actuators:
        if actuator in binary:
            actions.append(threshold_binary(target, actuator, binary[actuator]))
        else:
            actions.append(Action(actuator, share))
    return actions


def resolve_conflicts(raw_actions: Iterable[Action], rule: ConflictRule) -> list[Action]:
    """
    Combine all raw settings of each actuator into one, then clip it into the
    rule's bounds. The result is ordered by actuator id.
    """
    settings: dict[str, list[float]] = defaultdict(list)
    for action in raw_actions:
        settings[action.actuator].append(action.value)

    resolved = []
    for actuator in sorted(settings):
        values = settings[actuator]
        combined = rule.combiner.combine(values)
        if len(set(values)) > 1:
            logger.debug("Actuator %s received %r, %s chooses %s", actuator, values, rule.combiner.value, combined)
        resolved.append(Action(actuator, clamp(combined, rule.lower_bound, rule.upper_bound)))
    return resolved


class SplitEqualRule(ActuationRule):
    """Actuation policy sharing each target equally, switching binary actuators by threshold"""

    def __init__(self, name: str, conflict_rule: ConflictRule) -> None:
        self.name = name
        self.conflict_rule = conflict_rule

    def actuate(
        self,
        mediated: MediatedRequest,
        instance: PropertyInstance,
        actuators: Mapping[str, Actuator],
        season: Season | None = None,
    ) -> ActuationPlan:
        binary = {
            actuator_id: actuators[actuator_id].binary
            for actuator_id in instance.actuators
            if actuator_id in actuators and actuators[actuator_id].is_binary
        }
        actions = split_equal(mediated.value, instance.actuators, binary)
        return ActuationPlan(tuple(actions), self.conflict_rule)


# Conflicts are settled by the maximum, clipped into [0, 100]
SPLIT_EQUAL_MAX = SplitEqualRule("split_equal_max", ConflictRule(Combiner.MAX, 0.0, 100.0))

# The smart building policy name. Shared actuators still take the maximum, with no bounds.
SPLIT_EQUAL_MIN_UNBOUNDED = SplitEqualRule(
    "split_equal_min_unbounded", ConflictRule(Combiner.MAX, MIN_FLOAT, MAX_FLOAT)
)

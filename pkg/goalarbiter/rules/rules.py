"""
Classes to define rules for the mediation, actuation and request validation stages of a reaction.
The BaseRule, MediationRule, ActuationRule and ValidationRule classes are interfaces. The value
shapes flowing between stages are defined alongside them.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import wraps
from typing import Any

from goalarbiter.definitions import MAX_FLOAT, MIN_FLOAT, Combiner, PolicyKind, Season
from goalarbiter.model import Actuator, PropertyInstance
from goalarbiter.utils import json_number

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Request:
    """A goal reshaped for the pipeline. Raw requests may be invalid."""

    zone: str
    instance: str
    value: float
    user: str

    def to_dict(self) -> dict[str, Any]:
        return {"zone": self.zone, "instance": self.instance, "value": json_number(self.value), "user": self.user}


@dataclass(frozen=True)
class MediatedRequest:
    """The target value for a property instance"""

    zone: str
    instance: str
    value: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.zone, self.instance)

    def to_dict(self) -> dict[str, Any]:
        return {"zone": self.zone, "instance": self.instance, "value": json_number(self.value)}


@dataclass(frozen=True)
class Action:
    """A setting for a single actuator"""

    actuator: str
    value: float

    def to_dict(self) -> dict[str, Any]:
        return {"actuator": self.actuator, "value": json_number(self.value)}


@dataclass(frozen=True)
class GroupedRequests:
    """All valid requests targeting one property instance, as (value, user) pairs"""

    zone: str
    instance: str
    entries: tuple[tuple[float, str], ...]

    @property
    def values(self) -> list[float]:
        return [value for value, _ in self.entries]


@dataclass(frozen=True)
class MediationContext:
    """What a mediation rule may know about the property instance beyond the requests"""

    policy_id: str | None
    property_type: str
    sensed_value: float | None = None
    season: Season | None = None
    facts: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ConflictRule:
    """How to settle an actuator that receives several raw settings"""

    combiner: Combiner = Combiner.MAX
    lower_bound: float = MIN_FLOAT
    upper_bound: float = MAX_FLOAT

    def __post_init__(self):
        if self.lower_bound > self.upper_bound:
            raise ValueError(f"conflict rule bounds [{self.lower_bound}, {self.upper_bound}] are empty")


@dataclass(frozen=True)
class ActuationPlan:
    """Raw actions for one property instance and the rule to settle shared actuators"""

    actions: tuple[Action, ...]
    conflict_rule: ConflictRule


def check_applicable(func):
    """
    Decorator for the evaluation methods of rules restricted to some property types.
    Raises NotApplicable rather than evaluating the rule.
    """

    @wraps(func)
    def wrapped_function(self: BaseRule, *args, **kwargs):
        # Rules guarded by this decorator take (property_type, policy_id, ...) as their first arguments
        property_type, policy_id = (list(args[:2]) + [None, None])[:2]
        if not self.is_applicable(property_type, policy_id):
            logger.debug("Rule %s.%s is not applicable to %s/%s", self.name, func.__name__, policy_id, property_type)
            raise NotApplicable(self.name, property_type)

        return func(self, *args, **kwargs)

    return wrapped_function


class NotApplicable(Exception):
    """Signal that a rule does not apply, letting the next rule in a chain be tried"""

    def __init__(self, rule_name: str | None, property_type: str | None):
        super().__init__(f"rule {rule_name} does not apply to {property_type}")


class BaseRule(ABC):
    """
    A rule that may be registered in a PolicyRegistry and selected by name.

    Built-in rules and rules written in the policy language both implement one
    of the interfaces below.
    """

    name: str | None = None
    """ The name used to select the rule, e.g. from a zone declaration. This MUST be set
        in each derived class or instance."""

    kind: PolicyKind
    """ The stage of the reaction the rule takes part in."""

    property_types: list[str] | None = None
    """
    Property types the rule can handle. None indicates the rule handles any property type.
    """

    policy_ids: list[str] | None = None
    """
    Mediation policy identifiers (zone bindings) the rule applies under. None indicates any.
    """

    def is_applicable(self, property_type: str | None, policy_id: str | None = None) -> bool:
        """Test whether the rule should be applied to a property type under a zone policy"""
        if self.property_types is not None and property_type not in self.property_types:
            return False
        if self.policy_ids is not None and policy_id not in self.policy_ids:
            return False
        return True

    def describe(self) -> dict[str, Any]:
        """Summary used when listing a registry"""
        return {"kind": self.kind.value, "name": self.name, "source": None}


class MediationRule(BaseRule, ABC):
    """Reduces the grouped requests of a property instance to one target value"""

    kind = PolicyKind.MEDIATION

    @abstractmethod
    def mediate(self, group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
        """Return the target value for the property instance of the group"""


class ActuationRule(BaseRule, ABC):
    """Turns a target value into raw settings for the actuators of a property instance"""

    kind = PolicyKind.ACTUATION

    @abstractmethod
    def actuate(
        self,
        mediated: MediatedRequest,
        instance: PropertyInstance,
        actuators: Mapping[str, Actuator],
        season: Season | None = None,
    ) -> ActuationPlan:
        """Return one raw action per actuator of the instance and the conflict rule"""


class ValidationRule(BaseRule, ABC):
    """Extra checks on a (zone, instance, value) beyond the structural ones"""

    kind = PolicyKind.VALIDATION

    @abstractmethod
    def is_valid(self, instance: PropertyInstance, value: float, season: Season | None = None) -> bool:
        """Return whether a request or mediated value for the property instance is acceptable"""

"""
The PolicyRegistry allows built-in rules and policy language programs to be selected by name.

An ordered dictionary keyed by (kind, name) stores the rules. The order is that of
registration and is used when listing the registry.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from collections.abc import Iterable

from goalarbiter.definitions import PolicyKind
from goalarbiter.errors import PolicyEvaluationError, UnknownPolicyError
from goalarbiter.model import Zone
from goalarbiter.rules import ActuationRule, BaseRule, MediationRule, ValidationRule, builtin_rules

logger = logging.getLogger(__name__)

DEFAULT_MEDIATION = "average"
DEFAULT_ACTUATION = "split_equal_max"


class PolicyRegistry(OrderedDict[tuple[PolicyKind, str], BaseRule]):
    """Rules available to reactions, with the defaults applied when no binding is given"""

    def __init__(
        self,
        rules: Iterable[BaseRule] | None = None,
        default_mediation: str = DEFAULT_MEDIATION,
        default_actuation: str = DEFAULT_ACTUATION,
    ):
        super().__init__()
        for rule in builtin_rules() if rules is None else rules:
            self.register(rule)

        # Zone -> validation rule name. Zones without a binding only get the structural checks.
        self.validation_bindings: dict[str, str] = {}

        self._default_mediation = default_mediation
        self._default_actuation = default_actuation
        self.require(PolicyKind.MEDIATION, default_mediation)
        self.require(PolicyKind.ACTUATION, default_actuation)

    def require(self, kind: PolicyKind, name: str) -> BaseRule:
        """Return a registered rule, raising UnknownPolicyError if it is missing"""
        rule = self.get((kind, name))
        if rule is None:
            raise UnknownPolicyError(
                f"{kind.value} policy '{name}' is not registered", [{"kind": kind.value, "name": name}]
            )
        return rule

    @property
    def default_mediation(self) -> str:
        return self._default_mediation

    @default_mediation.setter
    def default_mediation(self, name: str) -> None:
        self.require(PolicyKind.MEDIATION, name)
        self._default_mediation = name

    @property
    def default_actuation(self) -> str:
        return self._default_actuation

    @default_actuation.setter
    def default_actuation(self, name: str) -> None:
        self.require(PolicyKind.ACTUATION, name)
        self._default_actuation = name

    def register(self, rule: BaseRule) -> None:
        """Add a rule, replacing any rule of the same kind and name"""
        if not rule.name:
            raise ValueError(f"rule {rule!r} has no name")
        key = (rule.kind, rule.name)
        if key in self:
            logger.debug("Replacing %s policy %s", rule.kind.value, rule.name)
        self[key] = rule

    def names(self, kind: PolicyKind) -> set[str]:
        return {name for rule_kind, name in self if rule_kind is kind}

    def lookup(self, kind: PolicyKind, name: str) -> BaseRule:
        """Return a rule a reaction needs, raising PolicyEvaluationError if it is missing"""
        rule = self.get((kind, name))
        if rule is None:
            raise PolicyEvaluationError(
                f"{kind.value} policy '{name}' is not registered", [{"kind": kind.value, "name": name}]
            )
        return rule

    def mediation_name(self, zone: Zone) -> str:
        """The policy identifier a zone is mediated under; unbound zones use the default"""
        return zone.mediation_policy or self._default_mediation

    def mediation_for(self, zone: Zone) -> MediationRule:
        rule = self.lookup(PolicyKind.MEDIATION, self.mediation_name(zone))
        assert isinstance(rule, MediationRule)
        return rule

    def actuation(self) -> ActuationRule:
        rule = self.lookup(PolicyKind.ACTUATION, self._default_actuation)
        assert isinstance(rule, ActuationRule)
        return rule

    def validation_for(self, zone_id: str) -> ValidationRule | None:
        name = self.validation_bindings.get(zone_id)
        if name is None:
            return None
        rule = self.lookup(PolicyKind.VALIDATION, name)
        assert isinstance(rule, ValidationRule)
        return rule

    def bind_validation(self, zone_id: str, name: str) -> None:
        self.require(PolicyKind.VALIDATION, name)
        self.validation_bindings[zone_id] = name

    def copy(self) -> PolicyRegistry:
        """Shallow copy used for reaction snapshots"""
        duplicate = PolicyRegistry(self.values(), self._default_mediation, self._default_actuation)
        duplicate.validation_bindings = dict(self.validation_bindings)
        return duplicate

    def describe(self) -> dict:
        return {
            "defaults": {"mediation": self._default_mediation, "actuation": self._default_actuation},
            "validationBindings": dict(self.validation_bindings),
            "policies": [rule.describe() for rule in self.values()],
        }

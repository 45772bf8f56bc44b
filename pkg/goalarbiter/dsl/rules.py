"""
Rules backed by policy language programs, so they can be registered alongside
the built-in rules of goalarbiter.rules.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from goalarbiter.definitions import PolicyKind, Season
from goalarbiter.model import Actuator, PropertyInstance
from goalarbiter.rules import (
    ActuationPlan,
    ActuationRule,
    BaseRule,
    GroupedRequests,
    MediatedRequest,
    MediationContext,
    MediationRule,
    ValidationRule,
)

from .ast import PolicyProgram
from .evaluator import eval_actuation, eval_mediation, eval_validation
from .parser import parse_policy
from .printer import print_policy

logger = logging.getLogger(__name__)


class ProgramRule(BaseRule):
    """Mixin holding the program behind a rule"""

    def __init__(self, program: PolicyProgram) -> None:
        if program.kind is not self.kind:
            raise ValueError(f"{program.name} is a {program.kind.value} policy, not a {self.kind.value} policy")
        self.program = program
        self.name = program.name

    @property
    def source(self) -> str:
        return print_policy(self.program)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "name": self.name, "source": self.source}


class DslMediationRule(ProgramRule, MediationRule):
    def mediate(self, group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
        return eval_mediation(self.program, group, ctx)


class DslActuationRule(ProgramRule, ActuationRule):
    def actuate(
        self,
        mediated: MediatedRequest,
        instance: PropertyInstance,
        actuators: Mapping[str, Actuator],
        season: Season | None = None,
    ) -> ActuationPlan:
        return eval_actuation(self.program, mediated, instance, actuators, season)


class DslValidationRule(ProgramRule, ValidationRule):
    def is_valid(self, instance: PropertyInstance, value: float, season: Season | None = None) -> bool:
        return eval_validation(self.program, instance, value, season)


RULE_CLASSES: dict[PolicyKind, type[ProgramRule]] = {
    PolicyKind.MEDIATION: DslMediationRule,
    PolicyKind.ACTUATION: DslActuationRule,
    PolicyKind.VALIDATION: DslValidationRule,
}


def rule_from_program(program: PolicyProgram) -> ProgramRule:
    return RULE_CLASSES[program.kind](program)


def rule_from_source(source: str) -> ProgramRule:
    """Parse a policy and wrap it as a rule of its kind"""
    return rule_from_program(parse_policy(source))


def rule_from_file(path: str | Path) -> ProgramRule:
    rule = rule_from_source(Path(path).read_text(encoding="utf-8"))
    logger.debug("Loaded %s policy %s from %s", rule.kind.value, rule.name, path)
    return rule

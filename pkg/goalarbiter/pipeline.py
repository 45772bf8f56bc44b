"""
The reaction pipeline: collect the requests users have submitted, mediate them per
property instance, then derive the actuator settings realising the target state.

Each stage is a plain function over a Snapshot and a PolicyRegistry. `react()`
chains them and refuses to return a partial plan: if either validator rejects
a stage's output the whole reaction fails.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

from goalarbiter.errors import (
    ActionsInvalidError,
    GoalArbiterError,
    MediationInvalidError,
    PolicyEvaluationError,
)
from goalarbiter.knowledge_base import Snapshot
from goalarbiter.registry import PolicyRegistry
from goalarbiter.rules import (
    Action,
    ActuationPlan,
    MediatedRequest,
    MediationContext,
    Request,
    group_per_instance,
    resolve_conflicts,
)
from goalarbiter.utils import json_number

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validator. Violations are listed in a stable order."""

    violations: tuple[dict[str, Any], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ReactionResult:
    requests: tuple[Request, ...] = ()
    mediated: tuple[MediatedRequest, ...] = ()
    actions: tuple[Action, ...] = ()
    valid: tuple[Request, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "requests": [x.to_dict() for x in self.requests],
            "valid": [x.to_dict() for x in self.valid],
            "mediated": [x.to_dict() for x in self.mediated],
            "actions": [x.to_dict() for x in self.actions],
        }


def valid_request(zone: str, instance: str, value: float, snapshot: Snapshot, registry: PolicyRegistry) -> bool:
    """
    The (zone, instance) must exist and, if the zone has a request validation policy,
    the value must satisfy it.
    """
    property_instance = snapshot.model.instance(zone, instance)
    if property_instance is None:
        return False

    rule = registry.validation_for(zone)
    if rule is None:
        return True
    try:
        return bool(rule.is_valid(property_instance, value, snapshot.model.context.season))
    except GoalArbiterError:
        raise
    except Exception as exc:
        raise PolicyEvaluationError(f"validation policy {rule.name} failed: {exc}") from exc


def collect_requests(snapshot: Snapshot, registry: PolicyRegistry) -> tuple[list[Request], list[Request]]:
    """Return all current goals as requests, and those that are authorised and valid"""
    requests = [Request(goal.zone, goal.instance, goal.value, goal.user) for goal in snapshot.goals]

    valid = []
    for request in requests:
        user = snapshot.model.users.get(request.user)
        if user is None or not user.may_set(request.zone):
            logger.warning("Ignoring request %r: %s is not authorised on zone %s", request, request.user, request.zone)
            continue
        if not valid_request(request.zone, request.instance, request.value, snapshot, registry):
            logger.warning("Ignoring request %r: not a valid request", request)
            continue
        valid.append(request)

    logger.debug("Collected %i requests, %i valid", len(requests), len(valid))
    return requests, valid


def mediate_requests(
    valid_requests: Iterable[Request], snapshot: Snapshot, registry: PolicyRegistry
) -> list[MediatedRequest]:
    """Apply each zone's mediation policy to the requests grouped per property instance"""
    model = snapshot.model
    mediated = []
    for group in group_per_instance(valid_requests):
        zone = model.zones[group.zone]
        instance = model.instance(group.zone, group.instance)
        assert instance is not None

        rule = registry.mediation_for(zone)
        ctx = MediationContext(
            policy_id=registry.mediation_name(zone),
            property_type=instance.property_type,
            sensed_value=model.sensed_value(instance),
            season=model.context.season,
            facts=model.context.facts,
        )
        try:
            result = rule.mediate(group, ctx)
        except GoalArbiterError:
            raise
        except Exception as exc:
            raise PolicyEvaluationError(
                f"mediation policy {rule.name} failed on ({group.zone}, {group.instance}): {exc}",
                [{"zone": group.zone, "instance": group.instance, "policy": rule.name}],
            ) from exc

        if not math.isfinite(result.value):
            raise PolicyEvaluationError(
                f"mediation policy {rule.name} gave ({group.zone}, {group.instance}) the value {result.value}",
                [{"zone": group.zone, "instance": group.instance, "policy": rule.name}],
            )
        logger.debug("Mediated %r with %s -> %s", group.entries, rule.name, result)
        mediated.append(result)

    return mediated


def associate_actions(
    mediated: Iterable[MediatedRequest], snapshot: Snapshot, registry: PolicyRegistry
) -> list[Action]:
    """Run the actuation policy on every target value and settle the shared actuators"""
    model = snapshot.model
    rule = registry.actuation()

    plans: list[ActuationPlan] = []
    for target in mediated:
        instance = model.instance(target.zone, target.instance)
        if instance is None:
            raise PolicyEvaluationError(
                f"no property instance ({target.zone}, {target.instance}) to actuate",
                [{"zone": target.zone, "instance": target.instance}],
            )
        try:
            plan = rule.actuate(target, instance, model.actuators, model.context.season)
        except GoalArbiterError:
            raise
        except Exception as exc:
            raise PolicyEvaluationError(
                f"actuation policy {rule.name} failed on ({target.zone}, {target.instance}): {exc}",
                [{"zone": target.zone, "instance": target.instance, "policy": rule.name}],
            ) from exc

        logger.debug("Raw actions for (%s, %s): %r", target.zone, target.instance, plan.actions)
        plans.append(plan)

    if not plans:
        return []

    # A single actuation policy is active, so every plan carries the same conflict rule
    conflict_rule = plans[0].conflict_rule
    raw_actions = [action for plan in plans for action in plan.actions]
    actions = resolve_conflicts(raw_actions, conflict_rule)
    for action in actions:
        if not math.isfinite(action.value):
            raise PolicyEvaluationError(
                f"actuation policy {rule.name} set {action.actuator} to {action.value}",
                [{"actuator": action.actuator, "policy": rule.name}],
            )
    return actions


def validate_mediation(
    mediated: Iterable[MediatedRequest], snapshot: Snapshot, registry: PolicyRegistry
) -> ValidationReport:
    """
    Mediation is valid when no property instance has two distinct target values and
    every target passes `valid_request()`. Exact duplicates are collapsed first.
    """
    targets: dict[tuple[str, str], set[float]] = defaultdict(set)
    for entry in mediated:
        targets[entry.key].add(entry.value)

    violations = []
    for zone, instance in sorted(targets):
        values = sorted(targets[(zone, instance)])
        if len(values) > 1:
            violations.append(
                {
                    "reason": "conflicting-values",
                    "zone": zone,
                    "instance": instance,
                    "values": [json_number(x) for x in values],
                }
            )
        for value in values:
            if not valid_request(zone, instance, value, snapshot, registry):
                violations.append(
                    {"reason": "invalid-request", "zone": zone, "instance": instance, "value": json_number(value)}
                )

    return ValidationReport(tuple(violations))


def validate_actions(actions: Iterable[Action], snapshot: Snapshot) -> ValidationReport:
    """
    Actions are valid when no actuator has two distinct settings and every setting lies
    in the actuator's valid range. Exact duplicates are collapsed first.
    """
    settings: dict[str, set[float]] = defaultdict(set)
    for action in actions:
        settings[action.actuator].add(action.value)

    violations = []
    for actuator_id in sorted(settings):
        values = sorted(settings[actuator_id])
        if len(values) > 1:
            violations.append(
                {"reason": "conflicting-values", "actuator": actuator_id, "values": [json_number(x) for x in values]}
            )

        actuator = snapshot.model.actuators.get(actuator_id)
        if actuator is None:
            violations.append({"reason": "unknown-actuator", "actuator": actuator_id})
            continue
        for value in values:
            if not actuator.valid_range.accepts(value):
                violations.append(
                    {
                        "reason": "out-of-range",
                        "actuator": actuator_id,
                        "value": json_number(value),
                        "validRange": actuator.valid_range.to_dict(),
                    }
                )

    return ValidationReport(tuple(violations))


def react(snapshot: Snapshot, registry: PolicyRegistry) -> ReactionResult:
    """One full reasoning cycle over a snapshot"""
    requests, valid = collect_requests(snapshot, registry)

    mediated = mediate_requests(valid, snapshot, registry)
    report = validate_mediation(mediated, snapshot, registry)
    if not report:
        logger.error("Mediation rejected at revision %i: %r", snapshot.revision, report.violations)
        raise MediationInvalidError("mediated requests failed validation", list(report.violations))

    actions = associate_actions(mediated, snapshot, registry)
    report = validate_actions(actions, snapshot)
    if not report:
        logger.error("Actions rejected at revision %i: %r", snapshot.revision, report.violations)
        raise ActionsInvalidError("actions failed validation", list(report.violations))

    logger.debug("Reaction at revision %i: %i mediated, %i actions", snapshot.revision, len(mediated), len(actions))
    return ReactionResult(tuple(requests), tuple(mediated), tuple(actions), tuple(valid))

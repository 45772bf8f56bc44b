"""
Rules to mediate between the requests of several users on one property instance.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable

from goalarbiter.errors import EmptyGroupError
from goalarbiter.utils import mean

from .bound_rules import find_value
from .rules import GroupedRequests, MediatedRequest, MediationContext, MediationRule, Request

logger = logging.getLogger(__name__)


def group_per_instance(valid_requests: Iterable[Request]) -> list[GroupedRequests]:
    """Partition requests by (zone, instance), ordered by zone then instance"""
    groups: dict[tuple[str, str], list[tuple[float, str]]] = defaultdict(list)
    for request in valid_requests:
        groups[(request.zone, request.instance)].append((request.value, request.user))

    return [GroupedRequests(zone, instance, tuple(groups[(zone, instance)])) for zone, instance in sorted(groups)]


def mediate_average(group: GroupedRequests) -> MediatedRequest:
    """Settle user-user conflicts by taking the mean of the requested values"""
    if not group.entries:
        raise EmptyGroupError(f"no requests to mediate for ({group.zone}, {group.instance})")

    return MediatedRequest(group.zone, group.instance, mean(group.values))


def mediate_contextual(group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
    """Average the requests, then reconcile the average with the global constraints"""
    average = mediate_average(group)
    value = find_value(ctx.policy_id, ctx.property_type, ctx.sensed_value, average.value, ctx.season)
    logger.debug(
        "Mediated (%s, %s) under %s: average %s -> %s", group.zone, group.instance, ctx.policy_id, average.value, value
    )
    return MediatedRequest(group.zone, group.instance, value)


class AverageRule(MediationRule):
    """Mediation policy that takes the mean of the requests"""

    name = "average"

    def mediate(self, group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
        return mediate_average(group)


class ContextualRule(MediationRule):
    """
    Mediation policy of a building wing. The wing is the zone's policy identifier,
    so the same rule is registered as both "east" and "west".
    """

    def __init__(self, name: str) -> None:
        self.name = name

    def mediate(self, group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
        return mediate_contextual(group, ctx)

"""
Rules implement the mediation, actuation and request validation policies of a reaction.
"""

from .actuation_rules import (
    SPLIT_EQUAL_MAX,
    SPLIT_EQUAL_MIN_UNBOUNDED,
    SplitEqualRule,
    resolve_conflicts,
    split_equal,
    threshold_binary,
)
from .bound_rules import BOUND_RULES, BoundRule, active_bounds, find_value
from .mediation_rules import AverageRule, ContextualRule, group_per_instance, mediate_average, mediate_contextual
from .rules import (
    Action,
    ActuationPlan,
    ActuationRule,
    BaseRule,
    ConflictRule,
    GroupedRequests,
    MediatedRequest,
    MediationContext,
    MediationRule,
    Request,
    ValidationRule,
)
from .validation_rules import AcceptAllRule


def builtin_rules() -> list[BaseRule]:
    """The rules every PolicyRegistry starts with"""
    return [
        AverageRule(),
        ContextualRule("east"),
        ContextualRule("west"),
        SPLIT_EQUAL_MAX,
        SPLIT_EQUAL_MIN_UNBOUNDED,
        AcceptAllRule(),
    ]


__all__ = [
    "AcceptAllRule",
    "Action",
    "ActuationPlan",
    "ActuationRule",
    "AverageRule",
    "BaseRule",
    "BOUND_RULES",
    "BoundRule",
    "ConflictRule",
    "ContextualRule",
    "GroupedRequests",
    "MediatedRequest",
    "MediationContext",
    "MediationRule",
    "Request",
    "SPLIT_EQUAL_MAX",
    "SPLIT_EQUAL_MIN_UNBOUNDED",
    "SplitEqualRule",
    "ValidationRule",
    "active_bounds",
    "builtin_rules",
    "find_value",
    "group_per_instance",
    "mediate_average",
    "mediate_contextual",
    "resolve_conflicts",
    "split_equal",
    "threshold_binary",
]

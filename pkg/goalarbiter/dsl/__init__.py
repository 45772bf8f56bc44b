"""
The policy language: administrators write mediation, actuation and request
validation policies as small programs instead of Python rules.
"""

from .ast import PolicyProgram
from .evaluator import eval_actuation, eval_mediation, eval_validation
from .parser import parse_policy
from .printer import print_policy
from .rules import (
    DslActuationRule,
    DslMediationRule,
    DslValidationRule,
    rule_from_file,
    rule_from_program,
    rule_from_source,
)

__all__ = [
    "DslActuationRule",
    "DslMediationRule",
    "DslValidationRule",
    "PolicyProgram",
    "eval_actuation",
    "eval_mediation",
    "eval_validation",
    "parse_policy",
    "print_policy",
    "rule_from_file",
    "rule_from_program",
    "rule_from_source",
]

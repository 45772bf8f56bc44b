"""
Exceptions raised by goalarbiter.

Every exception carries a human-readable `message` and a stable, machine-readable
`code` which the service layer reports back to callers.
"""

from __future__ import annotations

from typing import Any


class GoalArbiterError(Exception):
    """Base class for all goalarbiter errors."""

    code = "error"

    def __init__(self, message: str = "Operation failed", details: list[Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details: list[Any] = details if details is not None else []

    def to_dict(self) -> dict[str, Any]:
        """Error body used by the service and the CLI json output"""
        return {"code": self.code, "message": self.message, "details": self.details}


class ModelError(GoalArbiterError):
    """Raised when an environment description is structurally invalid."""

    code = "model-error"


class ModelFormatError(ModelError):
    code = "model-format"


class DuplicateIdError(ModelError):
    code = "duplicate-id"


class DanglingReferenceError(ModelError):
    code = "dangling-reference"


class PropertyTypeMismatchError(ModelError):
    code = "property-type-mismatch"


class UnknownSensorError(ModelError):
    code = "unknown-sensor"


class ValidationError(GoalArbiterError):
    """A stage of the reaction produced output that failed validation."""

    code = "validation-error"


class MediationInvalidError(ValidationError):
    code = "mediation-invalid"


class ActionsInvalidError(ValidationError):
    code = "actions-invalid"


class PolicyError(GoalArbiterError):
    code = "policy-error"


class PolicyEvaluationError(PolicyError):
    code = "policy-evaluation-error"


class UnknownPolicyError(PolicyError):
    """A policy was named that is not registered."""

    code = "unknown-policy"


class EmptyGroupError(PolicyEvaluationError):
    code = "empty-group"


class EmptyActuatorListError(PolicyEvaluationError):
    code = "empty-actuator-list"


class UnknownPolicyCombinationError(PolicyEvaluationError):
    code = "unknown-policy-combination"


class DslEvaluationError(PolicyEvaluationError):
    code = "evaluation-error"


class PolicySyntaxError(PolicyError):
    """The policy source could not be parsed."""

    code = "syntax-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None, expected=None):
        self.line = line
        self.column = column
        self.expected: list[str] = sorted(expected) if expected else []
        where = f" at line {line}, column {column}" if line is not None else ""
        details = [{"line": line, "column": column, "expected": self.expected}]
        super().__init__(f"{message}{where}", details)


class UnboundReferenceError(PolicySyntaxError):
    code = "unbound-reference"


class NonExhaustiveConditionalError(PolicySyntaxError):
    code = "non-exhaustive-conditional"


class ConfigError(GoalArbiterError):
    code = "config-error"


class ScenarioError(GoalArbiterError):
    code = "scenario-error"


class NoModelError(GoalArbiterError):
    """The knowledge base has not been given an environment model yet."""

    code = "no-model"


class BindError(GoalArbiterError):
    """The service could not listen on its configured address."""

    code = "port-in-use"

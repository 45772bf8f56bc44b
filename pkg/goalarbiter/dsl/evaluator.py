"""
Evaluate parsed policies.

Values are floats, strings, booleans, tuples of floats (`requests`) and None for
a sensed value or season that is not available. Every failure, whether a type
mismatch, a division by zero or a `fail` expression, is raised as a
DslEvaluationError so a policy can never take the engine down with it.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from typing import Any

from goalarbiter.definitions import Comparison, PolicyKind, Season
from goalarbiter.errors import DslEvaluationError
from goalarbiter.model import Actuator, BinarySetting, PropertyInstance
from goalarbiter.rules import (
    Action,
    ActuationPlan,
    ConflictRule,
    GroupedRequests,
    MediatedRequest,
    MediationContext,
    threshold_binary,
)
from goalarbiter.utils import clamp, mean

from . import ast

logger = logging.getLogger(__name__)

Value = float | str | bool | tuple | None


def _where(node: ast.Node) -> str:
    if node.line is None:
        return ""
    return f" at line {node.line}, column {node.column}"


def _error(node: ast.Node, message: str) -> DslEvaluationError:
    return DslEvaluationError(f"{message}{_where(node)}", [{"line": node.line, "column": node.column}])


def _is_number(value: Value) -> bool:
    return isinstance(value, float | int) and not isinstance(value, bool)


def _aggregate(function: Callable[[Sequence[float]], float], allow_empty: bool = False):
    def evaluate(node: ast.Call, args: list[Value]) -> float:
        values = args[0] if len(args) == 1 and isinstance(args[0], tuple) else args
        if not all(_is_number(x) for x in values):
            raise _error(node, f"{node.function}() needs numbers")
        if not values and not allow_empty:
            raise _error(node, f"{node.function}() of no values")
        return float(function(values))

    return evaluate


def _count(node: ast.Call, args: list[Value]) -> float:
    if not isinstance(args[0], tuple):
        raise _error(node, "count() needs a list")
    return float(len(args[0]))


def _clamp(node: ast.Call, args: list[Value]) -> float:
    if not all(_is_number(x) for x in args):
        raise _error(node, "clamp() needs numbers")
    value, low, high = args
    if low > high:
        raise _error(node, f"clamp() bounds [{low}, {high}] are empty")
    return clamp(value, low, high)


def _abs(node: ast.Call, args: list[Value]) -> float:
    if not _is_number(args[0]):
        raise _error(node, "abs() needs a number")
    return abs(float(args[0]))


FUNCTIONS: dict[str, Callable[[ast.Call, list[Value]], float]] = {
    "avg": _aggregate(mean),
    "min": _aggregate(min),
    "max": _aggregate(max),
    "sum": _aggregate(math.fsum, allow_empty=True),
    "count": _count,
    "clamp": _clamp,
    "abs": _abs,
}


class Evaluator:
    """Evaluate expressions against the names bound for one policy invocation"""

    def __init__(self, env: Mapping[str, Value], facts: Mapping[str, Any] | None = None) -> None:
        self.env = env
        self.facts = facts

    def evaluate(self, node: ast.Node) -> Value:
        method = getattr(self, f"eval_{type(node).__name__}", None)
        if method is None:
            raise _error(node, f"cannot evaluate {type(node).__name__}")
        return method(node)

    def number(self, node: ast.Node) -> float:
        value = self.evaluate(node)
        if not _is_number(value):
            raise _error(node, f"expected a number, found {value!r}")
        return float(value)

    def boolean(self, node: ast.Node) -> bool:
        value = self.evaluate(node)
        if not isinstance(value, bool):
            raise _error(node, f"expected a condition, found {value!r}")
        return value

    def eval_Number(self, node: ast.Number) -> float:
        return node.value

    def eval_String(self, node: ast.String) -> str:
        return node.value

    def eval_Reference(self, node: ast.Reference) -> Value:
        if node.name not in self.env:
            raise _error(node, f"'{node.name}' is not bound")
        value = self.env[node.name]
        if value is None:
            raise _error(node, f"'{node.name}' is not available")
        return value

    def eval_Fail(self, node: ast.Fail) -> Value:
        raise _error(node, node.message)

    def eval_Unary(self, node: ast.Unary) -> Value:
        if node.op == "not":
            return not self.boolean(node.operand)
        return -self.number(node.operand)

    def eval_Binary(self, node: ast.Binary) -> Value:
        if node.op == "and":
            return self.boolean(node.left) and self.boolean(node.right)
        if node.op == "or":
            return self.boolean(node.left) or self.boolean(node.right)

        left = self.number(node.left)
        right = self.number(node.right)
        if node.op == "+":
            result = left + right
        elif node.op == "-":
            result = left - right
        elif node.op == "*":
            result = left * right
        else:
            if right == 0:
                raise _error(node, "division by zero")
            result = left / right

        if math.isnan(result):
            raise _error(node, f"{left} {node.op} {right} is not a number")
        return result

    def eval_Compare(self, node: ast.Compare) -> bool:
        left = self.evaluate(node.left)
        right = self.evaluate(node.right)
        if _is_number(left) and _is_number(right):
            return node.op.function(float(left), float(right))
        if type(left) is type(right) and node.op in (Comparison.EQ, Comparison.NE):
            return node.op.function(left, right)
        raise _error(node, f"cannot compare {left!r} {node.op.value} {right!r}")

    def eval_Member(self, node: ast.Member) -> bool:
        operand = self.evaluate(node.operand)
        for option in node.options:
            value = self.evaluate(option)
            if _is_number(operand) and _is_number(value):
                if float(operand) == float(value):
                    return True
            elif type(operand) is type(value) and operand == value:
                return True
        return False

    def eval_Call(self, node: ast.Call) -> Value:
        if node.function == "fact":
            return self.fact(node)
        function = FUNCTIONS.get(node.function)
        if function is None:
            raise _error(node, f"unknown function '{node.function}'")
        return function(node, [self.evaluate(x) for x in node.args])

    def fact(self, node: ast.Call) -> Value:
        """A named context fact, e.g. fact("weather")"""
        name = self.evaluate(node.args[0])
        if not isinstance(name, str):
            raise _error(node, "fact() needs a name")
        if self.facts is None or name not in self.facts:
            raise _error(node, f"context fact '{name}' is not set")
        value = self.facts[name]
        return float(value) if _is_number(value) else value

    def eval_Conditional(self, node: ast.Conditional) -> Value:
        for condition, result in node.branches:
            if self.boolean(condition):
                return self.evaluate(result)
        if node.otherwise is None:
            raise _error(node, "no branch of the conditional applies")
        return self.evaluate(node.otherwise)


def _run(program: ast.PolicyProgram, kind: PolicyKind, evaluate: Callable[[], Any]) -> Any:
    """Run an evaluation, turning anything unexpected into a DslEvaluationError"""
    if program.kind is not kind:
        raise DslEvaluationError(f"{program.name} is a {program.kind.value} policy, not a {kind.value} policy")
    try:
        return evaluate()
    except DslEvaluationError:
        raise
    except Exception as exc:
        raise DslEvaluationError(f"{kind.value} policy {program.name} failed: {exc}") from exc


def _season(season: Season | None) -> str | None:
    return season.value if season is not None else None


def mediation_env(group: GroupedRequests, ctx: MediationContext) -> dict[str, Value]:
    values = tuple(float(x) for x in group.values)
    return {
        "candidate": mean(values) if values else None,
        "requests": values,
        "request_count": float(len(values)),
        "sensed": ctx.sensed_value,
        "season": _season(ctx.season),
        "property_type": ctx.property_type,
        "zone": group.zone,
        "instance": group.instance,
        "policy": ctx.policy_id,
    }


def eval_mediation(program: ast.PolicyProgram, group: GroupedRequests, ctx: MediationContext) -> MediatedRequest:
    """The target value a mediation policy gives a group of requests"""

    def evaluate() -> MediatedRequest:
        evaluator = Evaluator(mediation_env(group, ctx), ctx.facts)
        value = evaluator.number(program.body)
        return MediatedRequest(group.zone, group.instance, value)

    result = _run(program, PolicyKind.MEDIATION, evaluate)
    logger.debug("Policy %s mediated (%s, %s) to %s", program.name, group.zone, group.instance, result.value)
    return result


def _selects(clause: ast.Emit, actuator_id: str, actuator: Actuator | None) -> bool:
    if clause.selector is None:
        return True
    is_binary = actuator is not None and actuator.is_binary
    if clause.selector == ast.BINARY_SELECTOR:
        return is_binary
    if clause.selector == ast.CONTINUOUS_SELECTOR:
        return not is_binary
    return clause.actuator == actuator_id


def _emit(evaluator: Evaluator, clause: ast.Emit, actuator_id: str, actuator: Actuator | None) -> Action:
    form = clause.form
    target = evaluator.env["target"]
    count = evaluator.env["actuator_count"]
    if isinstance(form, ast.SplitEqual):
        return Action(actuator_id, target / count)

    if isinstance(form, ast.BinarySwitch) and form.declared:
        setting = actuator.binary if actuator is not None and actuator.binary is not None else BinarySetting()
        return threshold_binary(target, actuator_id, setting)

    if isinstance(form, ast.BinarySwitch):
        on = evaluator.number(form.on)
        off = evaluator.number(form.off)
        threshold = evaluator.number(form.threshold)
        return Action(actuator_id, on if form.comparison.function(target, threshold) else off)

    return Action(actuator_id, evaluator.number(form))


def eval_actuation(
    program: ast.PolicyProgram,
    mediated: MediatedRequest,
    instance: PropertyInstance,
    actuators: Mapping[str, Actuator],
    season: Season | None = None,
) -> ActuationPlan:
    """
    One raw action per actuator of the instance, set by the first emit clause that
    selects it, and the conflict rule of the policy.
    """

    def evaluate() -> ActuationPlan:
        body = program.body
        assert isinstance(body, ast.ActuationBody)
        if not instance.actuators:
            raise DslEvaluationError(f"property instance ({instance.zone}, {instance.id}) has no actuators")

        actions = []
        for actuator_id in instance.actuators:
            actuator = actuators.get(actuator_id)
            evaluator = Evaluator(
                {
                    "target": float(mediated.value),
                    "actuator_count": float(len(instance.actuators)),
                    "actuator": actuator_id,
                    "zone": instance.zone,
                    "instance": instance.id,
                    "property_type": instance.property_type,
                    "season": _season(season),
                }
            )
            clause = next((x for x in body.emits if _selects(x, actuator_id, actuator)), None)
            if clause is None:
                raise DslEvaluationError(f"no emit clause of {program.name} selects actuator '{actuator_id}'")
            actions.append(_emit(evaluator, clause, actuator_id, actuator))

        rule = ConflictRule(body.combine.combiner, body.combine.low, body.combine.high)
        return ActuationPlan(tuple(actions), rule)

    return _run(program, PolicyKind.ACTUATION, evaluate)


def eval_validation(
    program: ast.PolicyProgram, instance: PropertyInstance, value: float, season: Season | None = None
) -> bool:
    """Whether a request validation policy accepts a value for a property instance"""

    def evaluate() -> bool:
        evaluator = Evaluator(
            {
                "value": float(value),
                "zone": instance.zone,
                "instance": instance.id,
                "property_type": instance.property_type,
                "season": _season(season),
            }
        )
        return evaluator.boolean(program.body)

    return _run(program, PolicyKind.VALIDATION, evaluate)

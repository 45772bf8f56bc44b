"""
Parse policy sources into PolicyProgram trees.

The lark grammar in grammar.lark gives the concrete syntax. `PolicyTransformer`
turns the parse tree into the nodes of goalarbiter.dsl.ast, then the program is
checked for references its kind does not provide, calls to unknown functions
and conditionals without an `else`.
"""

from __future__ import annotations

import json
import logging
from functools import cache

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from goalarbiter.definitions import Combiner, Comparison, PolicyKind
from goalarbiter.errors import NonExhaustiveConditionalError, PolicySyntaxError, UnboundReferenceError

from . import ast

logger = logging.getLogger(__name__)

# Names each kind of program may refer to
REFERENCES: dict[PolicyKind, frozenset[str]] = {
    PolicyKind.MEDIATION: frozenset(
        {"candidate", "requests", "sensed", "season", "property_type", "zone", "instance", "policy", "request_count"}
    ),
    PolicyKind.ACTUATION: frozenset(
        {"target", "actuator_count", "actuator", "zone", "instance", "property_type", "season"}
    ),
    PolicyKind.VALIDATION: frozenset({"value", "zone", "instance", "property_type", "season"}),
}

# Function name -> (minimum, maximum) number of arguments
FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "avg": (1, None),
    "min": (1, None),
    "max": (1, None),
    "sum": (1, None),
    "count": (1, 1),
    "clamp": (3, 3),
    "abs": (1, 1),
    "fact": (1, 1),
}

# Deepest expression nesting a program may have
MAX_NESTING = 100


@cache
def _parser() -> Lark:
    return Lark.open("grammar.lark", rel_to=__file__, parser="lalr", propagate_positions=True)


def _position(meta) -> dict[str, int | None]:
    if getattr(meta, "empty", True):
        return {}
    return {"line": meta.line, "column": meta.column}


def _token_position(token: Token) -> dict[str, int | None]:
    return {"line": token.line, "column": token.column}


@v_args(meta=True)
class PolicyTransformer(Transformer):
    """Build ast nodes from the lark parse tree"""

    # Programs

    def mediation(self, meta, children):
        name, body = children
        return ast.PolicyProgram(PolicyKind.MEDIATION, str(name), body, **_position(meta))

    def validation(self, meta, children):
        name, body = children
        return ast.PolicyProgram(PolicyKind.VALIDATION, str(name), body, **_position(meta))

    def actuation(self, meta, children):
        name, *emits, combine = children
        body = ast.ActuationBody(tuple(emits), combine, **_position(meta))
        return ast.PolicyProgram(PolicyKind.ACTUATION, str(name), body, **_position(meta))

    # Actuation

    def emit(self, meta, children):
        form = children[0]
        selector, actuator = (children[1] if len(children) > 1 else (None, None))
        return ast.Emit(form, selector, actuator, **_position(meta))

    def split_equal(self, meta, children):
        return ast.SplitEqual(**_position(meta))

    def binary_declared(self, meta, children):
        return ast.BinarySwitch(**_position(meta))

    def binary_switch(self, meta, children):
        on, off, op, threshold = children
        return ast.BinarySwitch(on, off, Comparison(str(op)), threshold, **_position(meta))

    def emit_value(self, meta, children):
        return children[0]

    def select_binary(self, meta, children):
        return (ast.BINARY_SELECTOR, None)

    def select_continuous(self, meta, children):
        return (ast.CONTINUOUS_SELECTOR, None)

    def select_actuator(self, meta, children):
        return (ast.ACTUATOR_SELECTOR, json.loads(children[0]))

    def combine(self, meta, children):
        name, low, high = children
        try:
            combiner = Combiner(str(name))
        except ValueError:
            raise PolicySyntaxError(
                f"unknown combiner '{name}'", expected=[f'"{x.value}"' for x in Combiner], **_token_position(name)
            ) from None
        if low > high:
            raise PolicySyntaxError(f"empty bounds [{low}, {high}]", **_position(meta))
        return ast.Combine(combiner, low, high, **_position(meta))

    def positive_bound(self, meta, children):
        return float(children[0])

    def negative_bound(self, meta, children):
        return -float(children[0])

    def positive_infinity(self, meta, children):
        return float("inf")

    def negative_infinity(self, meta, children):
        return float("-inf")

    # Expressions

    def number(self, meta, children):
        return ast.Number(float(children[0]), **_position(meta))

    def infinity(self, meta, children):
        return ast.Number(float("inf"), **_position(meta))

    def string(self, meta, children):
        return ast.String(json.loads(children[0]), **_position(meta))

    def reference(self, meta, children):
        return ast.Reference(str(children[0]), **_position(meta))

    def call(self, meta, children):
        name, args = children
        return ast.Call(str(name), tuple(args or ()), **_position(meta))

    def args(self, meta, children):
        return list(children)

    def fail(self, meta, children):
        return ast.Fail(json.loads(children[0]), **_position(meta))

    def conditional(self, meta, children):
        condition, result, *elifs, otherwise = children
        branches = ((condition, result), *elifs)
        return ast.Conditional(tuple(branches), otherwise, **_position(meta))

    def elif_branch(self, meta, children):
        return (children[0], children[1])

    def neg(self, meta, children):
        (operand,) = children
        if isinstance(operand, ast.Number):
            # Negative literals are numbers, not negations
            return ast.Number(-operand.value, **_position(meta))
        return ast.Unary("-", operand, **_position(meta))

    def pos(self, meta, children):
        return children[0]

    def not_(self, meta, children):
        return ast.Unary("not", children[0], **_position(meta))

    def _binary(op):
        def build(self, meta, children):
            left, right = children
            return ast.Binary(op, left, right, **_position(meta))

        return build

    add = _binary("+")
    sub = _binary("-")
    mul = _binary("*")
    div = _binary("/")
    and_ = _binary("and")
    or_ = _binary("or")
    del _binary

    def compare(self, meta, children):
        left, op, right = children
        return ast.Compare(Comparison(str(op)), left, right, **_position(meta))

    def member(self, meta, children):
        operand, options = children
        return ast.Member(operand, tuple(options), **_position(meta))


def _describe_terminals(names) -> list[str]:
    """Show literal terminals as they are written, e.g. "then" rather than THEN"""
    described = []
    for name in names:
        try:
            pattern = _parser().get_terminal(name).pattern
        except KeyError:
            described.append("end of policy" if name == "$END" else name)
            continue
        if pattern.type == "str":
            described.append(f'"{pattern.value}"')
        else:
            described.append(name)
    return described


def _end_position(source: str) -> tuple[int, int]:
    lines = source.split("\n")
    return len(lines), len(lines[-1]) + 1


def _syntax_error(exc: UnexpectedInput, source: str) -> PolicySyntaxError:
    if isinstance(exc, UnexpectedEOF):
        line, column = _end_position(source)
        return PolicySyntaxError("unexpected end of policy", line, column, _describe_terminals(exc.expected))
    if isinstance(exc, UnexpectedCharacters):
        return PolicySyntaxError(
            f"unexpected character {source[exc.pos_in_stream]!r}",
            exc.line,
            exc.column,
            _describe_terminals(exc.allowed or ()),
        )

    token = getattr(exc, "token", None)
    expected = getattr(exc, "expected", None) or getattr(exc, "accepts", None) or ()
    if token is not None and token.type == "$END":
        line, column = _end_position(source)
        return PolicySyntaxError("unexpected end of policy", line, column, _describe_terminals(expected))
    return PolicySyntaxError(f"unexpected {str(token)!r}", exc.line, exc.column, _describe_terminals(expected))


def _too_deep() -> PolicySyntaxError:
    return PolicySyntaxError(f"policy nests too deeply (more than {MAX_NESTING} levels)")


def _nesting(program: ast.PolicyProgram) -> int:
    deepest = 0
    pending = [(program.body, 1)]
    while pending:
        node, depth = pending.pop()
        deepest = max(deepest, depth)
        pending.extend((child, depth + 1) for child in node.children())
    return deepest


def _check_fact(node: ast.Call, kind: PolicyKind) -> None:
    # Context facts only reach mediation policies
    if kind is not PolicyKind.MEDIATION:
        raise UnboundReferenceError(
            f"fact() is not available in {kind.value} policies", node.line, node.column, sorted(REFERENCES[kind])
        )
    if not isinstance(node.args[0], ast.String):
        raise PolicySyntaxError("fact() takes the name of a context fact as a string", node.line, node.column)


def check_program(program: ast.PolicyProgram) -> None:
    """Reject references a program's kind does not bind, unknown calls and conditionals without else"""
    if _nesting(program) > MAX_NESTING:
        raise _too_deep()
    allowed = REFERENCES[program.kind]
    for node in program.walk():
        if isinstance(node, ast.Reference) and node.name not in allowed:
            raise UnboundReferenceError(
                f"'{node.name}' is not available in {program.kind.value} policies",
                node.line,
                node.column,
                sorted(allowed),
            )
        if isinstance(node, ast.Call):
            if node.function not in FUNCTIONS:
                raise PolicySyntaxError(
                    f"unknown function '{node.function}'", node.line, node.column, sorted(FUNCTIONS)
                )
            least, most = FUNCTIONS[node.function]
            if len(node.args) < least or (most is not None and len(node.args) > most):
                raise PolicySyntaxError(
                    f"wrong number of arguments to {node.function}(): {len(node.args)}", node.line, node.column
                )
            if node.function == "fact":
                _check_fact(node, program.kind)
        if isinstance(node, ast.Conditional) and node.otherwise is None:
            raise NonExhaustiveConditionalError("conditional has no else branch", node.line, node.column, ['"else"'])


def parse_policy(source: str) -> ast.PolicyProgram:
    """
    Parse and check a policy, e.g.

        mediation average
        avg(requests)

    Raises PolicySyntaxError, or one of its subclasses UnboundReferenceError and
    NonExhaustiveConditionalError, with the line and column of the problem.
    """
    try:
        tree = _parser().parse(source)
    except UnexpectedInput as exc:
        raise _syntax_error(exc, source) from None

    try:
        program = PolicyTransformer().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, PolicySyntaxError):
            raise exc.orig_exc from None
        if isinstance(exc.orig_exc, RecursionError):
            raise _too_deep() from None
        raise
    except RecursionError:
        raise _too_deep() from None

    check_program(program)
    logger.debug("Parsed %s policy %s", program.kind.value, program.name)
    return program

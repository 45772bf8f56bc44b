"""
Print PolicyProgram trees back to source in a canonical layout.

Parentheses are only written where precedence needs them and conditionals are laid
out one branch per line, so `parse_policy(print_policy(p)) == p` and printing is
stable byte for byte.
"""

from __future__ import annotations

import json
import math

from goalarbiter.definitions import PolicyKind

from . import ast

INDENT = "    "

# Binding strength, loosest first. Atoms bind tightest.
PRECEDENCE = {"or": 1, "and": 2, "not": 3, "compare": 4, "+": 5, "-": 5, "*": 6, "/": 6, "neg": 7}
ATOM = 8


def format_number(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


class PolicyPrinter:
    """Visitor producing canonical source for policy nodes"""

    def print(self, program: ast.PolicyProgram) -> str:
        header = f"{program.kind.value} {program.name}"
        if program.kind is PolicyKind.ACTUATION:
            assert isinstance(program.body, ast.ActuationBody)
            lines = [header, *(self.emit(x) for x in program.body.emits), self.combine(program.body.combine)]
        else:
            lines = [header, self.expr(program.body)]
        return "\n".join(lines) + "\n"

    def emit(self, clause: ast.Emit) -> str:
        form = clause.form
        if isinstance(form, ast.SplitEqual):
            text = "emit split_equal"
        elif isinstance(form, ast.BinarySwitch) and form.declared:
            text = "emit binary"
        elif isinstance(form, ast.BinarySwitch):
            text = (
                f"emit binary({self.expr(form.on)}, {self.expr(form.off)}, "
                f"{form.comparison.value} {self.expr(form.threshold)})"
            )
        else:
            text = f"emit {self.expr(form)}"

        if clause.selector == ast.ACTUATOR_SELECTOR:
            text += f" for {json.dumps(clause.actuator)}"
        elif clause.selector is not None:
            text += f" for {clause.selector}"
        return text

    def combine(self, directive: ast.Combine) -> str:
        return (
            f"combine {directive.combiner.value} within "
            f"[{format_number(directive.low)}, {format_number(directive.high)}]"
        )

    @staticmethod
    def precedence(node: ast.Node) -> int:
        if isinstance(node, ast.Binary):
            return PRECEDENCE[node.op]
        if isinstance(node, ast.Unary):
            return PRECEDENCE["not"] if node.op == "not" else PRECEDENCE["neg"]
        if isinstance(node, ast.Compare | ast.Member):
            return PRECEDENCE["compare"]
        if isinstance(node, ast.Number) and node.value < 0:
            return PRECEDENCE["neg"]
        return ATOM

    def wrap(self, node: ast.Node, minimum: int, depth: int) -> str:
        text = self.expr(node, depth)
        if self.precedence(node) < minimum:
            return f"({text})"
        return text

    def expr(self, node: ast.Node, depth: int = 0) -> str:
        method = getattr(self, f"visit_{type(node).__name__}", None)
        if method is None:
            raise TypeError(f"cannot print {type(node).__name__}")
        return method(node, depth)

    def visit_Number(self, node: ast.Number, depth: int) -> str:
        return format_number(node.value)

    def visit_String(self, node: ast.String, depth: int) -> str:
        return json.dumps(node.value)

    def visit_Reference(self, node: ast.Reference, depth: int) -> str:
        return node.name

    def visit_Fail(self, node: ast.Fail, depth: int) -> str:
        return f"fail {json.dumps(node.message)}"

    def visit_Call(self, node: ast.Call, depth: int) -> str:
        args = ", ".join(self.expr(x, depth) for x in node.args)
        return f"{node.function}({args})"

    def visit_Unary(self, node: ast.Unary, depth: int) -> str:
        if node.op == "not":
            return f"not {self.wrap(node.operand, PRECEDENCE['not'], depth)}"
        return f"-{self.wrap(node.operand, PRECEDENCE['neg'], depth)}"

    def visit_Binary(self, node: ast.Binary, depth: int) -> str:
        level = PRECEDENCE[node.op]
        # Left associative: a right operand of equal precedence needs parentheses
        left = self.wrap(node.left, level, depth)
        right = self.wrap(node.right, level + 1, depth)
        return f"{left} {node.op} {right}"

    def visit_Compare(self, node: ast.Compare, depth: int) -> str:
        operand_level = PRECEDENCE["compare"] + 1
        left = self.wrap(node.left, operand_level, depth)
        right = self.wrap(node.right, operand_level, depth)
        return f"{left} {node.op.value} {right}"

    def visit_Member(self, node: ast.Member, depth: int) -> str:
        operand = self.wrap(node.operand, PRECEDENCE["compare"] + 1, depth)
        options = ", ".join(self.expr(x, depth) for x in node.options)
        return f"{operand} in ({options})"

    def visit_Conditional(self, node: ast.Conditional, depth: int) -> str:
        outer = INDENT * depth
        inner = INDENT * (depth + 1)
        parts = []
        for index, (condition, result) in enumerate(node.branches):
            keyword = "if" if index == 0 else f"\n{outer}elif"
            parts.append(f"{keyword} {self.expr(condition, depth)} then")
            parts.append(f"\n{inner}{self.expr(result, depth + 1)}")
        if node.otherwise is not None:
            parts.append(f"\n{outer}else\n{inner}{self.expr(node.otherwise, depth + 1)}")
        parts.append(f"\n{outer}end")
        return "".join(parts)


def print_policy(program: ast.PolicyProgram) -> str:
    """Canonical source text of a policy"""
    return PolicyPrinter().print(program)

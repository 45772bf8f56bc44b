"""
Nodes of a parsed policy. Positions are kept for diagnostics but do not take part
in comparisons, so a reparsed policy equals the original.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

from goalarbiter.definitions import Combiner, Comparison, PolicyKind


@dataclass(frozen=True)
class Node:
    line: int | None = field(default=None, compare=False, repr=False, kw_only=True)
    column: int | None = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> Iterator[Node]:
        return iter(())

    def walk(self) -> Iterator[Node]:
        """This node and all nodes below it, depth first"""
        yield self
        for child in self.children():
            yield from child.walk()


@dataclass(frozen=True)
class Number(Node):
    value: float


@dataclass(frozen=True)
class String(Node):
    value: str


@dataclass(frozen=True)
class Reference(Node):
    name: str


@dataclass(frozen=True)
class Unary(Node):
    """Arithmetic negation `-` or boolean `not`"""

    op: str
    operand: Node

    def children(self):
        yield self.operand


@dataclass(frozen=True)
class Binary(Node):
    """Arithmetic `+ - * /` and boolean `and`, `or`"""

    op: str
    left: Node
    right: Node

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True)
class Compare(Node):
    op: Comparison
    left: Node
    right: Node

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True)
class Member(Node):
    operand: Node
    options: tuple[Node, ...]

    def children(self):
        yield self.operand
        yield from self.options


@dataclass(frozen=True)
class Call(Node):
    function: str
    args: tuple[Node, ...] = ()

    def children(self):
        yield from self.args


@dataclass(frozen=True)
class Conditional(Node):
    """`if c then e elif c then e ... else e end`. `otherwise` is None only in rejected programs."""

    branches: tuple[tuple[Node, Node], ...]
    otherwise: Node | None = None

    def children(self):
        for condition, result in self.branches:
            yield condition
            yield result
        if self.otherwise is not None:
            yield self.otherwise


@dataclass(frozen=True)
class Fail(Node):
    message: str


# Actuation


@dataclass(frozen=True)
class SplitEqual(Node):
    """The target divided by the number of actuators of the instance"""


@dataclass(frozen=True)
class BinarySwitch(Node):
    """
    On or off depending on a comparison of the target with a threshold. Without
    arguments the actuator's declared settings and `> 0` are used.
    """

    on: Node | None = None
    off: Node | None = None
    comparison: Comparison = Comparison.GT
    threshold: Node | None = None

    @property
    def declared(self) -> bool:
        return self.on is None

    def children(self):
        for child in (self.on, self.off, self.threshold):
            if child is not None:
                yield child


BINARY_SELECTOR = "binary"
CONTINUOUS_SELECTOR = "continuous"
ACTUATOR_SELECTOR = "actuator"


@dataclass(frozen=True)
class Emit(Node):
    """
    A way to set actuators. `selector` is None for every actuator, `binary`,
    `continuous`, or `actuator` for the single actuator named by `actuator`.
    """

    form: Node
    selector: str | None = None
    actuator: str | None = None

    def children(self):
        yield self.form


@dataclass(frozen=True)
class Combine(Node):
    combiner: Combiner
    low: float
    high: float


@dataclass(frozen=True)
class ActuationBody(Node):
    emits: tuple[Emit, ...]
    combine: Combine

    def children(self):
        yield from self.emits


@dataclass(frozen=True)
class PolicyProgram(Node):
    kind: PolicyKind
    name: str
    body: Node

    def children(self):
        yield self.body

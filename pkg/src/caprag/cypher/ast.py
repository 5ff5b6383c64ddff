"""AST for the read-only Cypher subset.

All nodes are frozen dataclasses with tuple children, so structural equality
and hashing work out of the box; the pretty-printer round-trip tests rely on
that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

MAX_HOPS = 8

ScalarValue = Union[str, float, int, bool, None]


@dataclass(frozen=True)
class Literal:
    value: ScalarValue


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class PropertyRef:
    var: str
    prop: str


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple["ValueExpr", ...]


ValueExpr = Union[Literal, Param, PropertyRef, FuncCall]

COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison:
    op: str
    left: ValueExpr
    right: ValueExpr


@dataclass(frozen=True)
class BoolOp:
    op: str  # "AND" | "OR"
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class NotExpr:
    operand: "BoolExpr"


BoolExpr = Union[Comparison, BoolOp, NotExpr]


@dataclass(frozen=True)
class NodePattern:
    var: str | None = None
    label: str | None = None
    props: tuple[tuple[str, ValueExpr], ...] = ()


@dataclass(frozen=True)
class RelPattern:
    rtype: str
    direction: str = "out"  # "out" | "in" | "any"
    min_hops: int = 1
    max_hops: int = 1


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    rels: tuple[RelPattern, ...] = ()


@dataclass(frozen=True)
class ReturnItem:
    expr: ValueExpr
    alias: str | None = None


@dataclass(frozen=True)
class SortSpec:
    expr: ValueExpr
    descending: bool = False


@dataclass(frozen=True)
class CypherQuery:
    patterns: tuple[PathPattern, ...]
    return_items: tuple[ReturnItem, ...]
    where: BoolExpr | None = None
    order_by: SortSpec | None = None
    limit: int | None = None


@dataclass
class ResultTable:
    """Tabular execution result. ``type_mismatches`` counts comparisons whose
    operands had incompatible types (those rows evaluate to unknown)."""

    columns: list[str]
    rows: list[tuple[ScalarValue, ...]]
    type_mismatches: int = 0


def bound_variables(query: CypherQuery) -> set[str]:
    return {
        node.var
        for pattern in query.patterns
        for node in pattern.nodes
        if node.var is not None
    }


def referenced_variables(expr) -> set[str]:
    """All variable names a value or boolean expression refers to."""
    if isinstance(expr, PropertyRef):
        return {expr.var}
    if isinstance(expr, FuncCall):
        out: set[str] = set()
        for arg in expr.args:
            out |= referenced_variables(arg)
        return out
    if isinstance(expr, Comparison):
        return referenced_variables(expr.left) | referenced_variables(expr.right)
    if isinstance(expr, BoolOp):
        return referenced_variables(expr.left) | referenced_variables(expr.right)
    if isinstance(expr, NotExpr):
        return referenced_variables(expr.operand)
    return set()

"""Executor for the Cypher subset over a PropertyGraph.

Matching semantics:

- A match assigns every pattern node (named or anonymous) to a graph node
  honoring label and property-equality constraints, and every relationship
  step to a concrete edge path of the required type/direction whose length
  lies in the hop range. Distinct edge paths are distinct matches.
- Relationship uniqueness: no edge is used twice within one match, across all
  patterns of the MATCH clause (the openCypher convention).
- Candidate nodes and edges are visited in ascending id order, so results are
  deterministic even without ORDER BY.

WHERE uses three-valued logic: comparisons against a missing property (null)
are unknown, comparisons across incompatible type families are unknown and
counted in ``ResultTable.type_mismatches``; rows pass only when the whole
expression is true. Numbers form one family; booleans support only ``=`` and
``<>``. ORDER BY sorts nulls last and breaks ties by the full row under a
documented total order over heterogeneous values, so LIMIT is reproducible.
"""

from __future__ import annotations

from typing import Iterator

from ..graph_store import PropertyGraph
from .ast import (
    BoolOp,
    Comparison,
    CypherQuery,
    FuncCall,
    Literal,
    NodePattern,
    NotExpr,
    Param,
    PathPattern,
    PropertyRef,
    ResultTable,
    ScalarValue,
)
from .errors import CypherExecutionError
from .geo import geodist_km
from .printer import print_value

Assignment = dict[str, int]


class _Diag:
    __slots__ = ("type_mismatches",)

    def __init__(self):
        self.type_mismatches = 0


def _resolve_static(expr, params: dict) -> ScalarValue:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Param):
        if expr.name not in params:
            raise CypherExecutionError(f"missing parameter ${expr.name}")
        return params[expr.name]
    raise CypherExecutionError(f"property maps only accept literals and parameters: {expr!r}")


def _node_matches(
    graph: PropertyGraph, node_id: int, pattern: NodePattern, params: dict
) -> bool:
    node = graph.nodes[node_id]
    if pattern.label is not None and node.label != pattern.label:
        return False
    for key, value_expr in pattern.props:
        expected = _resolve_static(value_expr, params)
        if key not in node.properties or node.properties[key] != expected:
            return False
    return True


def _steps(graph: PropertyGraph, node_id: int, rtype: str, direction: str):
    """(edge_id, next_node) steps from a node, deduped, ascending edge order."""
    seen = set()
    out = []
    if direction in ("out", "any"):
        for edge in graph.out_edges(node_id, rtype):
            key = (edge.edge_id, edge.dst)
            if key not in seen:
                seen.add(key)
                out.append(key)
    if direction in ("in", "any"):
        for edge in graph.in_edges(node_id, rtype):
            key = (edge.edge_id, edge.src)
            if key not in seen:
                seen.add(key)
                out.append(key)
    out.sort()
    return out


def _walk_paths(
    graph: PropertyGraph,
    start: int,
    rtype: str,
    direction: str,
    min_hops: int,
    max_hops: int,
    used: frozenset[int],
) -> Iterator[tuple[int, frozenset[int]]]:
    """Yield (end_node, edges_used) for every distinct edge path from start."""

    def recurse(node: int, depth: int, path_edges: frozenset[int]):
        if depth >= min_hops:
            yield node, path_edges
        if depth == max_hops:
            return
        for edge_id, nxt in _steps(graph, node, rtype, direction):
            if edge_id in used or edge_id in path_edges:
                continue
            yield from recurse(nxt, depth + 1, path_edges | {edge_id})

    yield from recurse(start, 0, frozenset())


def _enumerate_bindings(
    graph: PropertyGraph, patterns: tuple[PathPattern, ...], params: dict
) -> Iterator[Assignment]:
    anon_counter = [0]

    def var_name(node: NodePattern) -> str:
        if node.var is not None:
            return node.var
        anon_counter[0] += 1
        return f" anon{anon_counter[0]}"

    # Pre-assign stable names to anonymous nodes so recursion is consistent.
    named_patterns = [
        (pattern, [var_name(n) for n in pattern.nodes]) for pattern in patterns
    ]

    def candidates(pattern_node: NodePattern, name: str, assignment: Assignment):
        if name in assignment:
            node_id = assignment[name]
            if _node_matches(graph, node_id, pattern_node, params):
                return [node_id]
            return []
        return [
            node_id
            for node_id in sorted(graph.nodes)
            if _node_matches(graph, node_id, pattern_node, params)
        ]

    def match_path(path_idx: int, assignment: Assignment, used: frozenset[int]):
        if path_idx == len(named_patterns):
            yield assignment
            return
        pattern, names = named_patterns[path_idx]

        def extend(step_idx: int, assignment: Assignment, used: frozenset[int]):
            if step_idx == len(pattern.rels):
                yield from match_path(path_idx + 1, assignment, used)
                return
            rel = pattern.rels[step_idx]
            next_node_pattern = pattern.nodes[step_idx + 1]
            next_name = names[step_idx + 1]
            current = assignment[names[step_idx]]
            for end, path_edges in _walk_paths(
                graph, current, rel.rtype, rel.direction, rel.min_hops, rel.max_hops, used
            ):
                if next_name in assignment:
                    if assignment[next_name] != end:
                        continue
                    if not _node_matches(graph, end, next_node_pattern, params):
                        continue
                    yield from extend(step_idx + 1, assignment, used | path_edges)
                else:
                    if not _node_matches(graph, end, next_node_pattern, params):
                        continue
                    next_assignment = dict(assignment)
                    next_assignment[next_name] = end
                    yield from extend(step_idx + 1, next_assignment, used | path_edges)

        first = pattern.nodes[0]
        first_name = names[0]
        for node_id in candidates(first, first_name, assignment):
            seeded = dict(assignment)
            seeded[first_name] = node_id
            yield from extend(0, seeded, used)

    yield from match_path(0, {}, frozenset())


def _eval_value(expr, graph, assignment, params, diag) -> ScalarValue:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Param):
        if expr.name not in params:
            raise CypherExecutionError(f"missing parameter ${expr.name}")
        return params[expr.name]
    if isinstance(expr, PropertyRef):
        node_id = assignment.get(expr.var)
        if node_id is None:
            raise CypherExecutionError(f"variable {expr.var} is not bound")
        return graph.nodes[node_id].properties.get(expr.prop)
    if isinstance(expr, FuncCall):
        args = [_eval_value(a, graph, assignment, params, diag) for a in expr.args]
        return _call_function(expr.name, args)
    raise CypherExecutionError(f"cannot evaluate {expr!r}")


def _call_function(name: str, args: list[ScalarValue]) -> ScalarValue:
    if name == "geodist":
        if len(args) != 4:
            raise CypherExecutionError("geodist takes (lon1, lat1, lon2, lat2)")
        if any(a is None for a in args):
            return None
        coords = []
        for arg in args:
            if isinstance(arg, bool) or not isinstance(arg, (int, float)):
                raise CypherExecutionError(f"geodist requires numeric arguments, got {arg!r}")
            coords.append(float(arg))
        return geodist_km(*coords)
    raise CypherExecutionError(f"unknown function {name}()")


def _family(value: ScalarValue) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    return "string"


def _eval_comparison(cmp: Comparison, graph, assignment, params, diag):
    left = _eval_value(cmp.left, graph, assignment, params, diag)
    right = _eval_value(cmp.right, graph, assignment, params, diag)
    if left is None or right is None:
        return None
    left_family, right_family = _family(left), _family(right)
    if left_family != right_family or (left_family == "bool" and cmp.op not in ("=", "<>")):
        diag.type_mismatches += 1
        return None
    if cmp.op == "=":
        return left == right
    if cmp.op == "<>":
        return left != right
    if cmp.op == "<":
        return left < right
    if cmp.op == "<=":
        return left <= right
    if cmp.op == ">":
        return left > right
    return left >= right


def _eval_bool(expr, graph, assignment, params, diag):
    if isinstance(expr, Comparison):
        return _eval_comparison(expr, graph, assignment, params, diag)
    if isinstance(expr, BoolOp):
        left = _eval_bool(expr.left, graph, assignment, params, diag)
        right = _eval_bool(expr.right, graph, assignment, params, diag)
        if expr.op == "AND":
            if left is False or right is False:
                return False
            if left is True and right is True:
                return True
            return None
        if left is True or right is True:
            return True
        if left is False and right is False:
            return False
        return None
    if isinstance(expr, NotExpr):
        inner = _eval_bool(expr.operand, graph, assignment, params, diag)
        return None if inner is None else (not inner)
    raise CypherExecutionError(f"cannot evaluate boolean {expr!r}")


def value_sort_key(value: ScalarValue) -> tuple:
    """Total order over heterogeneous cell values: bools < numbers < strings < null."""
    if value is None:
        return (3, 0.0)
    if isinstance(value, bool):
        return (0, float(value))
    if isinstance(value, (int, float)):
        return (1, float(value))
    return (2, value)


def row_sort_key(row: tuple) -> tuple:
    return tuple(value_sort_key(cell) for cell in row)


def execute(ast: CypherQuery, graph: PropertyGraph, params: dict | None = None) -> ResultTable:
    """Run a parsed query; see module docstring for the exact semantics."""
    params = dict(params or {})
    diag = _Diag()

    projected: list[tuple[ScalarValue, tuple]] = []  # (sort value, row)
    for assignment in _enumerate_bindings(graph, ast.patterns, params):
        if ast.where is not None:
            verdict = _eval_bool(ast.where, graph, assignment, params, diag)
            if verdict is not True:
                continue
        row = tuple(
            _eval_value(item.expr, graph, assignment, params, diag)
            for item in ast.return_items
        )
        sort_value = (
            _eval_value(ast.order_by.expr, graph, assignment, params, diag)
            if ast.order_by is not None
            else None
        )
        projected.append((sort_value, row))

    if ast.order_by is not None:
        projected.sort(key=lambda pair: row_sort_key(pair[1]))
        non_null = [p for p in projected if p[0] is not None]
        nulls = [p for p in projected if p[0] is None]
        non_null.sort(
            key=lambda pair: value_sort_key(pair[0]), reverse=ast.order_by.descending
        )
        projected = non_null + nulls

    rows = [row for _, row in projected]
    if ast.limit is not None:
        rows = rows[: ast.limit]

    columns = [
        item.alias if item.alias else print_value(item.expr) for item in ast.return_items
    ]
    return ResultTable(columns=columns, rows=rows, type_mismatches=diag.type_mismatches)

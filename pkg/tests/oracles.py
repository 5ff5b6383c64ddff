"""Independent oracles the test suite checks the engine against.

Everything here is deliberately written from the documented semantics rather
than from the engine code: a second haversine built on 3-D vectors, a
full-sort brute-force vector search, and a naive enumerate-all-bindings
Cypher evaluator. Keep these implementations naive; their value is that they
share no code path with the modules they check.
"""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0


def geodist_oracle_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance via unit vectors and atan2 (not haversine)."""

    def unit(lon: float, lat: float):
        lam, phi = math.radians(lon), math.radians(lat)
        return (
            math.cos(phi) * math.cos(lam),
            math.cos(phi) * math.sin(lam),
            math.sin(phi),
        )

    a = unit(lon1, lat1)
    b = unit(lon2, lat2)
    cross = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    cross_norm = math.sqrt(cross[0] ** 2 + cross[1] ** 2 + cross[2] ** 2)
    dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    return EARTH_RADIUS_KM * math.atan2(cross_norm, dot)


def brute_force_search(entries, query_values, k):
    """Full sort of every (id, vector) entry by cosine desc, id asc.

    ``entries`` is a list of (chunk_id, values) with numpy arrays; returns the
    top-k chunk ids.
    """
    qn = float(np.linalg.norm(query_values))
    scored = []
    for chunk_id, values in entries:
        norm = float(np.linalg.norm(values))
        if norm == 0.0 or qn == 0.0:
            score = 0.0
        else:
            score = float(np.dot(values, query_values) / (norm * qn))
        scored.append((-score, chunk_id))
    scored.sort()
    return [chunk_id for _, chunk_id in scored[:k]]


# --- naive Cypher oracle ------------------------------------------------------
#
# Operates on a plain dict graph: {"nodes": {id: {"label": str, "props": {...}}},
#                                  "edges": [(edge_id, type, src, dst), ...]}
# and the engine's AST types (the AST is the shared contract; the semantics
# below are re-derived from the documented rules).

from caprag.cypher.ast import (  # noqa: E402
    BoolOp,
    Comparison,
    FuncCall,
    Literal,
    NotExpr,
    Param,
    PropertyRef,
)


def plain_graph(graph) -> dict:
    """Convert a PropertyGraph to the dict form the oracle walks."""
    return {
        "nodes": {
            nid: {"label": node.label, "props": dict(node.properties)}
            for nid, node in graph.nodes.items()
        },
        "edges": [
            (edge.edge_id, edge.type, edge.src, edge.dst) for edge in graph.edges.values()
        ],
    }


def _oracle_value(expr, graph, binding, params):
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Param):
        return params[expr.name]
    if isinstance(expr, PropertyRef):
        return graph["nodes"][binding[expr.var]]["props"].get(expr.prop)
    if isinstance(expr, FuncCall):
        args = [_oracle_value(a, graph, binding, params) for a in expr.args]
        if expr.name == "geodist":
            if any(a is None for a in args):
                return None
            return geodist_oracle_km(*[float(a) for a in args])
        raise AssertionError(f"oracle: unknown function {expr.name}")
    raise AssertionError(f"oracle: unknown value expr {expr!r}")


def _oracle_family(value):
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    return "string"


def _oracle_bool(expr, graph, binding, params):
    if isinstance(expr, Comparison):
        left = _oracle_value(expr.left, graph, binding, params)
        right = _oracle_value(expr.right, graph, binding, params)
        if left is None or right is None:
            return None
        if _oracle_family(left) != _oracle_family(right):
            return None
        if _oracle_family(left) == "bool" and expr.op not in ("=", "<>"):
            return None
        return {
            "=": lambda: left == right,
            "<>": lambda: left != right,
            "<": lambda: left < right,
            "<=": lambda: left <= right,
            ">": lambda: left > right,
            ">=": lambda: left >= right,
        }[expr.op]()
    if isinstance(expr, BoolOp):
        lv = _oracle_bool(expr.left, graph, binding, params)
        rv = _oracle_bool(expr.right, graph, binding, params)
        if expr.op == "AND":
            if lv is False or rv is False:
                return False
            if lv is True and rv is True:
                return True
            return None
        if lv is True or rv is True:
            return True
        if lv is False and rv is False:
            return False
        return None
    if isinstance(expr, NotExpr):
        inner = _oracle_bool(expr.operand, graph, binding, params)
        return None if inner is None else not inner
    raise AssertionError(f"oracle: unknown bool expr {expr!r}")


def _node_ok(graph, node_id, pattern, params):
    node = graph["nodes"][node_id]
    if pattern.label is not None and node["label"] != pattern.label:
        return False
    for key, value_expr in pattern.props:
        if isinstance(value_expr, Param):
            expected = params[value_expr.name]
        else:
            expected = value_expr.value
        if key not in node["props"] or node["props"][key] != expected:
            return False
    return True


def _all_paths(graph, start, rtype, direction, min_hops, max_hops, banned):
    """Every distinct edge path (end, edge_id tuple) within the hop range."""
    results = []

    def step_candidates(node):
        steps = set()
        for edge_id, etype, src, dst in graph["edges"]:
            if etype != rtype:
                continue
            if direction in ("out", "any") and src == node:
                steps.add((edge_id, dst))
            if direction in ("in", "any") and dst == node:
                steps.add((edge_id, src))
        return steps

    def walk(node, used_path):
        depth = len(used_path)
        if depth >= min_hops:
            results.append((node, tuple(used_path)))
        if depth == max_hops:
            return
        for edge_id, nxt in step_candidates(node):
            if edge_id in banned or edge_id in used_path:
                continue
            walk(nxt, used_path + [edge_id])

    walk(start, [])
    return results


def oracle_execute(query, graph: dict, params: dict | None = None):
    """Row multiset (list of tuples, pre-ORDER) for a parsed query.

    Applies WHERE and projection; ORDER BY/LIMIT are applied by re-sorting
    with the documented total order so results compare exactly.
    """
    params = params or {}
    all_bindings = []

    # Assign synthetic names to anonymous pattern nodes.
    patterns = []
    anon = [0]
    for pattern in query.patterns:
        names = []
        for node in pattern.nodes:
            if node.var is None:
                anon[0] += 1
                names.append(f"!anon{anon[0]}")
            else:
                names.append(node.var)
        patterns.append((pattern, names))

    def match_from(pidx, binding, used_edges):
        if pidx == len(patterns):
            all_bindings.append(dict(binding))
            return
        pattern, names = patterns[pidx]

        def grow(step, binding, used_edges):
            if step == len(pattern.rels):
                match_from(pidx + 1, binding, used_edges)
                return
            rel = pattern.rels[step]
            cur = binding[names[step]]
            nxt_name = names[step + 1]
            nxt_pattern = pattern.nodes[step + 1]
            for end, path in _all_paths(
                graph, cur, rel.rtype, rel.direction, rel.min_hops, rel.max_hops, used_edges
            ):
                if not _node_ok(graph, end, nxt_pattern, params):
                    continue
                if nxt_name in binding:
                    if binding[nxt_name] != end:
                        continue
                    grow(step + 1, binding, used_edges | set(path))
                else:
                    grow(step + 1, {**binding, nxt_name: end}, used_edges | set(path))

        first_name = names[0]
        if first_name in binding:
            if _node_ok(graph, binding[first_name], pattern.nodes[0], params):
                grow(0, binding, used_edges)
            return
        for node_id in graph["nodes"]:
            if _node_ok(graph, node_id, pattern.nodes[0], params):
                grow(0, {**binding, first_name: node_id}, set(used_edges))

    match_from(0, {}, set())

    kept = []
    for binding in all_bindings:
        if query.where is not None:
            if _oracle_bool(query.where, graph, binding, params) is not True:
                continue
        row = tuple(
            _oracle_value(item.expr, graph, binding, params) for item in query.return_items
        )
        order_key = (
            _oracle_value(query.order_by.expr, graph, binding, params)
            if query.order_by is not None
            else None
        )
        kept.append((order_key, row))

    def cell_key(value):
        if value is None:
            return (3, 0.0)
        if isinstance(value, bool):
            return (0, float(value))
        if isinstance(value, (int, float)):
            return (1, float(value))
        return (2, value)

    if query.order_by is not None:
        kept.sort(key=lambda pair: tuple(cell_key(c) for c in pair[1]))
        with_key = [p for p in kept if p[0] is not None]
        without = [p for p in kept if p[0] is None]
        with_key.sort(key=lambda pair: cell_key(pair[0]), reverse=query.order_by.descending)
        kept = with_key + without

    rows = [row for _, row in kept]
    if query.limit is not None:
        rows = rows[: query.limit]
    return rows

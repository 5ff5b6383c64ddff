"""Canonical single-line pretty-printer for the Cypher subset AST.

Printing an AST and re-parsing the text yields an equal AST: boolean
operators always print parenthesized, hop ranges always print both bounds,
and string literals use double quotes with the lexer's escape set.
"""

from __future__ import annotations

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
    RelPattern,
)

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _print_string(value: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(ch, ch) for ch in value) + '"'


def print_literal(lit: Literal) -> str:
    value = lit.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return _print_string(value)
    return repr(value)


def print_value(expr) -> str:
    if isinstance(expr, Literal):
        return print_literal(expr)
    if isinstance(expr, Param):
        return f"${expr.name}"
    if isinstance(expr, PropertyRef):
        return f"{expr.var}.{expr.prop}"
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(print_value(a) for a in expr.args)})"
    raise TypeError(f"not a value expression: {expr!r}")


def print_bool(expr) -> str:
    if isinstance(expr, Comparison):
        return f"{print_value(expr.left)} {expr.op} {print_value(expr.right)}"
    if isinstance(expr, BoolOp):
        return f"({print_bool(expr.left)} {expr.op} {print_bool(expr.right)})"
    if isinstance(expr, NotExpr):
        return f"NOT {print_bool(expr.operand)}"
    raise TypeError(f"not a boolean expression: {expr!r}")


def print_node(node: NodePattern) -> str:
    body = node.var or ""
    if node.label:
        body += f":{node.label}"
    if node.props:
        entries = ", ".join(f"{k}: {print_value(v)}" for k, v in node.props)
        body += (" " if body else "") + "{" + entries + "}"
    return f"({body})"


def print_rel(rel: RelPattern) -> str:
    hops = "" if (rel.min_hops, rel.max_hops) == (1, 1) else f"*{rel.min_hops}..{rel.max_hops}"
    body = f"[:{rel.rtype}{hops}]"
    if rel.direction == "out":
        return f"-{body}->"
    if rel.direction == "in":
        return f"<-{body}-"
    return f"-{body}-"


def print_pattern(pattern: PathPattern) -> str:
    parts = [print_node(pattern.nodes[0])]
    for rel, node in zip(pattern.rels, pattern.nodes[1:]):
        parts.append(print_rel(rel))
        parts.append(print_node(node))
    return "".join(parts)


def print_query(query: CypherQuery) -> str:
    parts = ["MATCH " + ", ".join(print_pattern(p) for p in query.patterns)]
    if query.where is not None:
        parts.append("WHERE " + print_bool(query.where))
    items = []
    for item in query.return_items:
        rendered = print_value(item.expr)
        if item.alias:
            rendered += f" AS {item.alias}"
        items.append(rendered)
    parts.append("RETURN " + ", ".join(items))
    if query.order_by is not None:
        direction = "DESC" if query.order_by.descending else "ASC"
        parts.append(f"ORDER BY {print_value(query.order_by.expr)} {direction}")
    if query.limit is not None:
        parts.append(f"LIMIT {query.limit}")
    return " ".join(parts)

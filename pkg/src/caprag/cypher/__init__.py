"""Read-only Cypher subset: lexer, parser, pretty-printer, and executor."""

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
    ResultTable,
    ReturnItem,
    SortSpec,
)
from .errors import (
    CypherError,
    CypherExecutionError,
    CypherSemanticError,
    CypherSyntaxError,
)
from .executor import execute
from .geo import EARTH_RADIUS_KM, geodist_km
from .parser import parse_cypher
from .printer import print_query

__all__ = [
    "BoolOp",
    "Comparison",
    "CypherQuery",
    "CypherError",
    "CypherExecutionError",
    "CypherSemanticError",
    "CypherSyntaxError",
    "EARTH_RADIUS_KM",
    "FuncCall",
    "Literal",
    "NodePattern",
    "NotExpr",
    "Param",
    "PathPattern",
    "PropertyRef",
    "RelPattern",
    "ResultTable",
    "ReturnItem",
    "SortSpec",
    "execute",
    "geodist_km",
    "parse_cypher",
    "print_query",
]

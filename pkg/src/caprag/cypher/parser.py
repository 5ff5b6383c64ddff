"""Recursive-descent parser for the Cypher subset.

Grammar (EBNF; reserved words case-insensitive, identifiers case-sensitive):

    query       = "MATCH" pattern { "," pattern }
                  [ "WHERE" bool_or ]
                  "RETURN" return_item { "," return_item }
                  [ "ORDER" "BY" sort_item ] [ "LIMIT" integer ] EOF ;
    pattern     = node { relationship node } ;
    node        = "(" [ identifier ] [ ":" identifier ] [ property_map ] ")" ;
    property_map= "{" identifier ":" prop_value { "," identifier ":" prop_value } "}" ;
    prop_value  = literal | parameter ;
    relationship= "-" "[" ":" identifier [ hops ] "]" ( "->" | "-" )
                | "<" "-" "[" ":" identifier [ hops ] "]" "-" ;
    hops        = "*" integer [ ".." integer ] ;            (* 1 <= min <= max <= 8 *)
    bool_or     = bool_and { "OR" bool_and } ;
    bool_and    = bool_not { "AND" bool_not } ;
    bool_not    = "NOT" bool_not | "(" bool_or ")" | comparison ;
    comparison  = value ( "=" | "<>" | "<" | "<=" | ">" | ">=" ) value ;
    value       = literal | parameter | identifier "." identifier
                | identifier "(" [ value { "," value } ] ")" ;
    literal     = string | [ "-" ] number | "TRUE" | "FALSE" ;
    parameter   = "$" identifier ;
    return_item = value [ "AS" identifier ] ;
    sort_item   = value [ "ASC" | "DESC" ] ;

Every variable referenced outside MATCH must be bound by a node pattern;
violations raise CypherSemanticError. Relationship hop ranges above 8 are
rejected at parse time.
"""

from __future__ import annotations

from .ast import (
    MAX_HOPS,
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
    ReturnItem,
    SortSpec,
    bound_variables,
    referenced_variables,
)
from .errors import CypherSemanticError, CypherSyntaxError
from .lexer import Token, tokenize

_VALUE_STARTS = {"STRING", "NUMBER", "TRUE", "FALSE", "$", "IDENT", "-"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str) -> bool:
        return self.current.kind == kind

    def advance(self) -> Token:
        token = self.current
        if token.kind != "EOF":
            self.pos += 1
        return token

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.advance()
        return None

    def expect(self, kind: str, context: str | None = None) -> Token:
        if self.at(kind):
            return self.advance()
        self.fail(context or f"unexpected token {self.current.text!r}", {kind})

    def fail(self, message: str, expected: set[str]) -> None:
        token = self.current
        shown = token.text if token.kind != "EOF" else "end of input"
        raise CypherSyntaxError(
            f"{message} (found {shown!r})", token.line, token.col, expected
        )

    # --- grammar ---------------------------------------------------------

    def parse_query(self) -> CypherQuery:
        self.expect("MATCH", "query must start with MATCH")
        patterns = [self.parse_pattern()]
        while self.accept(","):
            patterns.append(self.parse_pattern())
        where = None
        if self.accept("WHERE"):
            where = self.parse_bool_or()
        self.expect("RETURN", "expected RETURN clause")
        items = [self.parse_return_item()]
        while self.accept(","):
            items.append(self.parse_return_item())
        order_by = None
        if self.accept("ORDER"):
            self.expect("BY", "ORDER must be followed by BY")
            expr = self.parse_value()
            descending = False
            if self.accept("DESC"):
                descending = True
            else:
                self.accept("ASC")
            order_by = SortSpec(expr=expr, descending=descending)
        limit = None
        if self.accept("LIMIT"):
            token = self.expect("NUMBER", "LIMIT requires an integer")
            if not isinstance(token.value, int) or token.value < 0:
                raise CypherSyntaxError(
                    "LIMIT must be a non-negative integer", token.line, token.col
                )
            limit = token.value
        if not self.at("EOF"):
            self.fail("trailing input after query", {"EOF"})
        query = CypherQuery(
            patterns=tuple(patterns),
            return_items=tuple(items),
            where=where,
            order_by=order_by,
            limit=limit,
        )
        _check_bindings(query)
        return query

    def parse_pattern(self) -> PathPattern:
        nodes = [self.parse_node()]
        rels = []
        while self.at("-") or self.at("<"):
            rels.append(self.parse_relationship())
            nodes.append(self.parse_node())
        return PathPattern(nodes=tuple(nodes), rels=tuple(rels))

    def parse_node(self) -> NodePattern:
        self.expect("(", "expected node pattern")
        var = None
        if self.at("IDENT"):
            var = self.advance().text
        label = None
        if self.accept(":"):
            label = self.expect("IDENT", "expected label name").text
        props: list[tuple[str, object]] = []
        if self.accept("{"):
            while True:
                key = self.expect("IDENT", "expected property name").text
                self.expect(":", "property map entries are name: value")
                props.append((key, self.parse_prop_value()))
                if not self.accept(","):
                    break
            self.expect("}", "unclosed property map")
        self.expect(")", "unclosed node pattern")
        return NodePattern(var=var, label=label, props=tuple(props))

    def parse_prop_value(self):
        if self.at("$"):
            return self.parse_param()
        return self.parse_literal()

    def parse_param(self) -> Param:
        self.expect("$")
        return Param(name=self.expect("IDENT", "expected parameter name").text)

    def parse_literal(self) -> Literal:
        if self.at("STRING"):
            return Literal(self.advance().value)
        if self.accept("TRUE"):
            return Literal(True)
        if self.accept("FALSE"):
            return Literal(False)
        negative = bool(self.accept("-"))
        if self.at("NUMBER"):
            value = self.advance().value
            return Literal(-value if negative else value)
        self.fail("expected literal", {"STRING", "NUMBER", "TRUE", "FALSE"})

    def parse_relationship(self) -> RelPattern:
        if self.accept("<"):
            self.expect("-", "expected '-' after '<'")
            direction = "in"
            self.expect("[", "expected '[' in relationship pattern")
            rtype, min_hops, max_hops = self.parse_rel_body()
            self.expect("]", "unclosed relationship pattern")
            self.expect("-", "expected '-' after ']'")
            return RelPattern(rtype=rtype, direction=direction, min_hops=min_hops, max_hops=max_hops)
        self.expect("-", "expected relationship pattern")
        self.expect("[", "expected '[' in relationship pattern")
        rtype, min_hops, max_hops = self.parse_rel_body()
        self.expect("]", "unclosed relationship pattern")
        if self.accept("->"):
            direction = "out"
        else:
            self.expect("-", "relationship must end with '->' or '-'")
            direction = "any"
        return RelPattern(rtype=rtype, direction=direction, min_hops=min_hops, max_hops=max_hops)

    def parse_rel_body(self) -> tuple[str, int, int]:
        self.expect(":", "relationship type is required, as in [:TYPE]")
        rtype = self.expect("IDENT", "expected relationship type").text
        min_hops = max_hops = 1
        if self.accept("*"):
            token = self.expect("NUMBER", "hop range requires explicit bounds")
            if not isinstance(token.value, int):
                raise CypherSyntaxError("hop bounds must be integers", token.line, token.col)
            min_hops = max_hops = token.value
            if self.accept(".."):
                token2 = self.expect("NUMBER", "expected upper hop bound")
                if not isinstance(token2.value, int):
                    raise CypherSyntaxError("hop bounds must be integers", token2.line, token2.col)
                max_hops = token2.value
            if not (1 <= min_hops <= max_hops <= MAX_HOPS):
                raise CypherSyntaxError(
                    f"hop range *{min_hops}..{max_hops} outside 1..{MAX_HOPS}",
                    token.line,
                    token.col,
                )
        return rtype, min_hops, max_hops

    def parse_return_item(self) -> ReturnItem:
        expr = self.parse_value()
        alias = None
        if self.accept("AS"):
            alias = self.expect("IDENT", "expected alias name").text
        return ReturnItem(expr=expr, alias=alias)

    def parse_bool_or(self):
        expr = self.parse_bool_and()
        while self.accept("OR"):
            expr = BoolOp(op="OR", left=expr, right=self.parse_bool_and())
        return expr

    def parse_bool_and(self):
        expr = self.parse_bool_not()
        while self.accept("AND"):
            expr = BoolOp(op="AND", left=expr, right=self.parse_bool_not())
        return expr

    def parse_bool_not(self):
        if self.accept("NOT"):
            return NotExpr(operand=self.parse_bool_not())
        if self.accept("("):
            inner = self.parse_bool_or()
            self.expect(")", "unclosed boolean group")
            return inner
        return self.parse_comparison()

    def parse_comparison(self) -> Comparison:
        left = self.parse_value()
        for op in ("=", "<>", "<=", ">=", "<", ">"):
            if self.accept(op):
                return Comparison(op=op, left=left, right=self.parse_value())
        self.fail("expected comparison operator", {"=", "<>", "<", "<=", ">", ">="})

    def parse_value(self):
        if self.at("$"):
            return self.parse_param()
        if self.at("IDENT"):
            name = self.advance().text
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.parse_value())
                    while self.accept(","):
                        args.append(self.parse_value())
                self.expect(")", "unclosed function call")
                return FuncCall(name=name, args=tuple(args))
            self.expect(".", "bare variables are not values; select a property")
            prop = self.expect("IDENT", "expected property name").text
            return PropertyRef(var=name, prop=prop)
        if self.current.kind in ("STRING", "NUMBER", "TRUE", "FALSE", "-"):
            return self.parse_literal()
        self.fail("expected value expression", _VALUE_STARTS)


def _check_bindings(query: CypherQuery) -> None:
    bound = bound_variables(query)
    used: set[str] = set()
    if query.where is not None:
        used |= referenced_variables(query.where)
    for item in query.return_items:
        used |= referenced_variables(item.expr)
    if query.order_by is not None:
        used |= referenced_variables(query.order_by.expr)
    for pattern in query.patterns:
        for node in pattern.nodes:
            for _, value in node.props:
                used |= referenced_variables(value)
    unbound = used - bound
    if unbound:
        raise CypherSemanticError(
            f"variables not bound in MATCH: {', '.join(sorted(unbound))}"
        )


def parse_cypher(query_text: str) -> CypherQuery:
    """Parse query text into an AST; see the module docstring for the grammar."""
    return _Parser(tokenize(query_text)).parse_query()

"""Error types raised by the Cypher subset engine."""

from __future__ import annotations

from ..errors import CapragError


class CypherError(CapragError):
    pass


class CypherSyntaxError(CypherError):
    """Lexing/parsing failure with position and the token kinds that were expected."""

    def __init__(self, message: str, line: int, col: int, expected: set[str] | None = None):
        self.line = line
        self.col = col
        self.expected = set(expected or ())
        detail = f"{message} at line {line}, column {col}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class CypherSemanticError(CypherError):
    """The query parsed but references something it never bound."""


class CypherExecutionError(CypherError):
    """Execution failed: missing parameter, bad function call, invalid coordinate."""

"""Tokenizer for the Cypher subset. Tracks 1-based line/column per token."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CypherSyntaxError

# Multi-character operators must be tried before their prefixes.
_OPERATORS = ("<=", ">=", "<>", "->", "..", "=", "<", ">", "(", ")", "[", "]", "{", "}",
              ":", ",", ".", "*", "-", "$")

_ESCAPES = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "t": "\t"}

KEYWORDS = {
    "MATCH", "WHERE", "RETURN", "ORDER", "BY", "ASC", "DESC",
    "LIMIT", "AND", "OR", "NOT", "AS", "TRUE", "FALSE",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "IDENT", "STRING", "NUMBER", keyword name, operator literal, "EOF"
    text: str
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)

    def error(message: str):
        raise CypherSyntaxError(message, line, col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch == '"' or ch == "'":
            quote = ch
            i += 1
            col += 1
            chars = []
            while True:
                if i >= n:
                    error("unterminated string literal")
                cur = source[i]
                if cur == "\n":
                    error("unterminated string literal")
                if cur == "\\":
                    if i + 1 >= n:
                        error("dangling escape in string literal")
                    esc = source[i + 1]
                    if esc not in _ESCAPES:
                        error(f"unknown escape \\{esc}")
                    chars.append(_ESCAPES[esc])
                    i += 2
                    col += 2
                    continue
                if cur == quote:
                    i += 1
                    col += 1
                    break
                chars.append(cur)
                i += 1
                col += 1
            text = "".join(chars)
            tokens.append(Token("STRING", text, text, start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            seen_dot = seen_exp = False
            while j < n:
                cur = source[j]
                if cur.isdigit():
                    j += 1
                elif cur == "." and not seen_dot and not seen_exp and j + 1 < n and source[j + 1].isdigit():
                    seen_dot = True
                    j += 1
                elif cur in "eE" and not seen_exp and j + 1 < n and (
                    source[j + 1].isdigit()
                    or (source[j + 1] in "+-" and j + 2 < n and source[j + 2].isdigit())
                ):
                    seen_exp = True
                    j += 2 if source[j + 1] in "+-" else 1
                else:
                    break
            text = source[i:j]
            value: object = float(text) if (seen_dot or seen_exp) else int(text)
            tokens.append(Token("NUMBER", text, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            upper = text.upper()
            if upper in KEYWORDS:
                tokens.append(Token(upper, text, upper, start_line, start_col))
            else:
                tokens.append(Token("IDENT", text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token(op, op, op, start_line, start_col))
                i += len(op)
                col += len(op)
                break
        else:
            error(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", None, line, col))
    return tokens

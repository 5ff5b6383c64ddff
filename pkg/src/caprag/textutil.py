"""Text primitives shared across the engine.

Tokens are whitespace-delimited units everywhere in this codebase, including
context budgets; no model tokenizer is involved. Terms are tokens lowered with
punctuation characters removed, used for hashing, lexical re-ranking and the
mock judge. Sentences split on `.`, `!` or `?` followed by whitespace.
"""

from __future__ import annotations

import re
import string

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def tokens(text: str) -> list[str]:
    """Whitespace tokens, verbatim."""
    return text.split()


def count_tokens(text: str) -> int:
    return len(text.split())


def terms(text: str) -> list[str]:
    """Normalized tokens: lowercased, punctuation characters removed, empties dropped."""
    out = []
    for tok in text.lower().split():
        tok = tok.translate(_PUNCT_TABLE)
        if tok:
            out.append(tok)
    return out


def term_set(text: str) -> set[str]:
    return set(terms(text))


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation followed by whitespace.

    The trailing fragment is kept even without final punctuation. Empty and
    whitespace-only fragments are dropped.
    """
    parts = _SENTENCE_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def term_overlap(reference: str, candidate: str) -> float:
    """|terms(reference) ∩ terms(candidate)| / |terms(reference)|, 0.0 when reference has no terms."""
    ref = term_set(reference)
    if not ref:
        return 0.0
    return len(ref & term_set(candidate)) / len(ref)

"""Tokenization, normalization, and the frozen stop-word list.

The built-in tokenizer is deliberately simple and deterministic: lowercase,
split on whitespace, strip ASCII punctuation. Every component that needs
tokens (concept extraction, n-gram providers, hashed features, masking
eligibility) goes through this one function so their views of a string agree.
"""

from __future__ import annotations

import string
from importlib import resources

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.translate(_PUNCT_TABLE)
        if tok:
            tokens.append(tok)
    return tokens


def normalize_phrase(text: str) -> str:
    """Canonical single-spaced form of a phrase, via the built-in tokenizer."""
    return " ".join(tokenize(text))


def normalize_whitespace(text: str) -> str:
    """Collapse runs of whitespace to single spaces and trim the ends."""
    return " ".join(text.split())


def _load_stop_words() -> frozenset[str]:
    data = resources.files("kgqa.data").joinpath("stopwords.txt").read_text("utf-8")
    words = [ln.strip() for ln in data.splitlines() if ln.strip() and not ln.startswith("#")]
    return frozenset(words)


#: Frozen list of 127 common English function words (version 1). Shared by
#: concept extraction, non-stop masking restrictions, and external scoring
#: adapters; changing it changes scores, so it is versioned data, not code.
STOP_WORDS: frozenset[str] = _load_stop_words()


def content_tokens(text: str) -> list[str]:
    """Tokens of ``text`` with stop words removed (order preserved)."""
    return [t for t in tokenize(text) if t not in STOP_WORDS]


def is_structural_token(token: str) -> bool:
    """True for relation markers and placeholders like ``<xWant>`` / ``<blank>``.

    Structural tokens are never eligible for masking: they carry the frame of
    a verbalized triple rather than its content.
    """
    return len(token) >= 2 and token.startswith("<") and token.endswith(">")

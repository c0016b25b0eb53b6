"""Tokenization and the hashed word vocabulary.

The adapter owns its tokenization: clients send raw text and receive one
log-probability per token *as this side counts tokens*. Words map to a fixed
number of hash buckets through blake2b, so ids are stable across processes,
platforms, and Python hash randomization — a requirement for byte-identical
golden transcripts.
"""

from __future__ import annotations

import hashlib
import string
from importlib import resources

#: Reserved ids below the first hash bucket.
BOS_ID = 0
MASK_ID = 1
NUM_SPECIALS = 2

DEFAULT_BUCKETS = 509

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip ASCII punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.translate(_PUNCT_TABLE)
        if tok:
            tokens.append(tok)
    return tokens


class WordVocab:
    """Maps words to ``NUM_SPECIALS + blake2b(word) % buckets``."""

    def __init__(self, buckets: int = DEFAULT_BUCKETS):
        if buckets < 1:
            raise ValueError(f"buckets must be >= 1, got {buckets}")
        self.buckets = int(buckets)

    def size(self) -> int:
        return NUM_SPECIALS + self.buckets

    def id_of(self, word: str) -> int:
        digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
        return NUM_SPECIALS + int.from_bytes(digest, "little") % self.buckets

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]


def _load_stop_words() -> frozenset[str]:
    data = resources.files("lm_adapter.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(ln.strip() for ln in data.splitlines() if ln.strip() and not ln.startswith("#"))


#: Frozen stop-word list (version 1), identical to the one the scoring
#: pipeline ships; ``mask_stop_words`` requests are filtered against it.
STOP_WORDS: frozenset[str] = _load_stop_words()

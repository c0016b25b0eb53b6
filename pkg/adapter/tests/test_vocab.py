"""Tokenizer rules, hash-vocabulary stability, and the frozen stop list."""

import pytest

from lm_adapter import NUM_SPECIALS, STOP_WORDS, WordVocab, tokenize
from lm_adapter.vocab import BOS_ID, MASK_ID


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("The cat SAT.", ["the", "cat", "sat"]),
        ("  bread   inside\tthe toaster ", ["bread", "inside", "the", "toaster"]),
        ("don't stop!", ["dont", "stop"]),
        ("...", []),
        ("", []),
        ("a-b c_d", ["ab", "cd"]),
        ("numbers 123 and 456!", ["numbers", "123", "and", "456"]),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_ids_stable_across_instances():
    a, b = WordVocab(97), WordVocab(97)
    words = ["cat", "toaster", "venue17", "object42", "über"]
    assert [a.id_of(w) for w in words] == [b.id_of(w) for w in words]


def test_ids_in_bucket_range():
    vocab = WordVocab(97)
    for word in ["x", "y", "zebra", "123"]:
        assert NUM_SPECIALS <= vocab.id_of(word) < vocab.size()


def test_size_counts_specials():
    assert WordVocab(509).size() == 509 + NUM_SPECIALS
    assert BOS_ID != MASK_ID
    assert max(BOS_ID, MASK_ID) < NUM_SPECIALS


def test_encode_maps_each_token():
    vocab = WordVocab(97)
    tokens = tokenize("the cat sat")
    assert vocab.encode(tokens) == [vocab.id_of(t) for t in tokens]


def test_bucket_count_validated():
    with pytest.raises(ValueError, match="buckets"):
        WordVocab(0)


def test_stop_words_frozen_list():
    assert "the" in STOP_WORDS
    assert "of" in STOP_WORDS
    assert "toaster" not in STOP_WORDS
    assert len(STOP_WORDS) == 127

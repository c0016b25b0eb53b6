"""Session behavior: modes, capability gating, stop-word filtering, limits."""

import math

import pytest

from lm_adapter import AdapterError, AdapterSession, SessionConfig
from lm_adapter.vocab import tokenize


def test_hello_reports_name_and_vocab(session):
    hello = session.hello()
    assert hello == {"name": "tiny-transformer", "vocab_size": 97 + 2}
    assert hello["vocab_size"] >= 2


def test_ar_scores_every_token(session):
    text = "the cat sat on the mat"
    result = session.score(text, "ar")
    assert result["n"] == len(tokenize(text)) == 6
    assert len(result["per_token_logprobs"]) == result["n"]
    assert all(math.isfinite(lp) and lp <= 0 for lp in result["per_token_logprobs"])


def test_mlm_scores_every_token_by_default(session):
    result = session.score("bread inside the toaster", "mlm")
    assert result["n"] == 4


def test_mlm_stop_word_filter_subsets_the_unfiltered_terms(session):
    text = "the cat sat on the mat"
    full = session.score(text, "mlm", mask_stop_words=False)["per_token_logprobs"]
    filtered = session.score(text, "mlm", mask_stop_words=True)
    # non-stop positions: cat(1), sat(2), mat(5)
    assert filtered["n"] == 3
    assert filtered["per_token_logprobs"] == [full[1], full[2], full[5]]


def test_ar_ignores_stop_word_flag(session):
    text = "the cat sat"
    assert session.score(text, "ar", True) == session.score(text, "ar", False)


def test_all_stop_words_is_an_error(session):
    with pytest.raises(AdapterError, match="stop word"):
        session.score("the of and", "mlm", mask_stop_words=True)


def test_tokenless_text_is_an_error(session):
    with pytest.raises(AdapterError, match="no tokens"):
        session.score("...", "ar")


def test_overlong_text_is_an_error(session):
    text = " ".join(f"w{i}" for i in range(33))
    with pytest.raises(AdapterError, match="exceeding"):
        session.score(text, "ar")


def test_unknown_mode_is_an_error(session):
    with pytest.raises(AdapterError, match="unknown mode"):
        session.score("hello world", "xr")


def test_capability_rejection_never_approximates():
    ar_only = AdapterSession(SessionConfig(modes=("ar",), max_len=16, buckets=97))
    assert ar_only.score("hello world", "ar")["n"] == 2
    with pytest.raises(AdapterError, match="not supported"):
        ar_only.score("hello world", "mlm")


def test_mlm_only_session_rejects_ar():
    mlm_only = AdapterSession(SessionConfig(modes=("mlm",), max_len=16, buckets=97))
    assert mlm_only.score("hello world", "mlm")["n"] == 2
    with pytest.raises(AdapterError, match="not supported"):
        mlm_only.score("hello world", "ar")


def test_same_config_sessions_score_identically():
    config = SessionConfig(seed=3, max_len=16, buckets=97)
    a, b = AdapterSession(config), AdapterSession(config)
    text = "bread inside the toaster"
    for mode in ("ar", "mlm"):
        assert a.score(text, mode) == b.score(text, mode)


def test_different_seeds_score_differently():
    a = AdapterSession(SessionConfig(seed=3, max_len=16, buckets=97))
    b = AdapterSession(SessionConfig(seed=4, max_len=16, buckets=97))
    text = "bread inside the toaster"
    assert a.score(text, "ar") != b.score(text, "ar")


def test_mode_identity_is_per_model():
    """AR and MLM scores come from different models, not one reused network."""
    s = AdapterSession(SessionConfig(seed=3, max_len=16, buckets=97))
    text = "bread inside the toaster"
    assert s.score(text, "ar") != s.score(text, "mlm")


def test_config_validation():
    with pytest.raises(ValueError, match="mode"):
        SessionConfig(modes=())
    with pytest.raises(ValueError, match="unknown mode"):
        SessionConfig(modes=("ar", "nope"))
    with pytest.raises(ValueError, match="duplicate"):
        SessionConfig(modes=("ar", "ar"))
    with pytest.raises(ValueError, match="max_len"):
        SessionConfig(max_len=1)

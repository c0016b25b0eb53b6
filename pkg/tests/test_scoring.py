"""Scoring: providers, the two sequence scores, and answer selection.

The n-gram provider is checked against hand-computed Laplace values and,
for the masked conditional, against a brute-force oracle that renormalizes
the full padded joint probability — independent of the windowed-factor
shortcut the implementation uses.
"""

from __future__ import annotations

import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgqa import (
    NgramProvider,
    QAItem,
    ScoringError,
    TemplateTable,
    UniformProvider,
    non_stop_indices,
    score_autoregressive,
    score_item,
    score_masked,
    select_answer,
    tokenize,
)
from kgqa.scoring import BOS, EOS, UNK, ScoredSequence


class TestUniformProvider:
    def test_both_scores_equal_log_vocab_size(self):
        for v in (2, 4, 100):
            p = UniformProvider(v)
            for tokens in (["x"], ["a", "b", "c"], list("abcdefgh")):
                assert math.isclose(score_autoregressive(p, tokens).score, math.log(v), rel_tol=0, abs_tol=1e-12)
                assert math.isclose(score_masked(p, tokens).score, math.log(v), rel_tol=0, abs_tol=1e-12)

    def test_rejects_tiny_vocab(self):
        with pytest.raises(ValueError):
            UniformProvider(1)


def _reference_joint(counts, totals, v, order, symbols):
    """log-probability of a padded symbol sequence under Laplace counts."""
    total = 0.0
    for j in range(order - 1, len(symbols)):
        ctx = tuple(symbols[j - order + 1 : j])
        c = counts.get(ctx, {}).get(symbols[j], 0)
        t = totals.get(ctx, 0)
        total += math.log((c + 1.0) / (t + 1.0 * v))
    return total


def _reference_counts(corpus, order):
    """Recount n-grams from scratch (independent of the provider)."""
    vocab = set()
    for sent in corpus:
        vocab.update(tokenize(sent))
    vocab |= {UNK, BOS, EOS}
    counts: dict = {}
    totals: Counter = Counter()
    for sent in corpus:
        padded = [BOS] * (order - 1) + tokenize(sent) + [EOS]
        for j in range(order - 1, len(padded)):
            ctx = tuple(padded[j - order + 1 : j])
            counts.setdefault(ctx, Counter())[padded[j]] += 1
            totals[ctx] += 1
    return counts, totals, vocab


class TestNgramProvider:
    CORPUS = ["a b", "a c"]

    def test_hand_computed_bigram_values(self):
        # vocab = {a, b, c, <unk>, <bos>, <eos>}, V = 6
        p = NgramProvider(self.CORPUS, order=2, alpha=1.0)
        assert p.vocab_size() == 6
        assert math.isclose(p.logprob_next([], "a"), math.log(3 / 8), abs_tol=1e-12)
        assert math.isclose(p.logprob_next(["a"], "b"), math.log(2 / 8), abs_tol=1e-12)
        assert math.isclose(p.logprob_next(["a"], "c"), math.log(2 / 8), abs_tol=1e-12)
        # out-of-vocabulary target maps to <unk>
        assert math.isclose(p.logprob_next(["a"], "zzz"), math.log(1 / 8), abs_tol=1e-12)

    def test_unseen_context_is_exactly_uniform(self):
        p = NgramProvider(self.CORPUS, order=2, alpha=1.0)
        v = p.vocab_size()
        for target in ("a", "b", "zzz", EOS):
            assert p.logprob_next(["unseen"], target) == pytest.approx(math.log(1 / v), abs=1e-15)

    def test_next_distribution_sums_to_one(self):
        p = NgramProvider(self.CORPUS, order=2, alpha=1.0)
        vocab = [BOS, EOS, UNK, "a", "b", "c"]
        for prefix in ([], ["a"], ["b"], ["zzz"]):
            total = sum(math.exp(p.logprob_next(prefix, t)) for t in vocab)
            assert abs(total - 1.0) <= 1e-9

    def test_masked_distribution_sums_to_one(self):
        p = NgramProvider(self.CORPUS, order=2, alpha=1.0)
        vocab = [BOS, EOS, UNK, "a", "b", "c"]
        tokens = ["a", "b"]
        for idx in range(len(tokens)):
            total = 0.0
            for cand in vocab:
                variant = list(tokens)
                variant[idx] = cand
                total += math.exp(p.logprob_masked(variant, idx))
            assert abs(total - 1.0) <= 1e-9

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_masked_matches_full_joint_oracle(self, order):
        """Windowed masked conditional == renormalized full joint."""
        corpus = ["a b c a", "b c b", "a c"]
        p = NgramProvider(corpus, order=order, alpha=1.0)
        counts, totals, vocab = _reference_counts(corpus, order)
        v = len(vocab)
        tokens = ["a", "b", "c"]
        for idx in range(len(tokens)):
            joint = {}
            for cand in sorted(vocab):
                symbols = [BOS] * (order - 1) + tokens + [EOS]
                symbols[order - 1 + idx] = cand
                joint[cand] = _reference_joint(counts, totals, v, order, symbols)
            log_z = math.log(sum(math.exp(x) for x in joint.values()))
            expected = joint[tokens[idx]] - log_z
            assert p.logprob_masked(tokens, idx) == pytest.approx(expected, abs=1e-9)

    def test_untrained_provider_is_uniform_over_specials(self):
        p = NgramProvider([], order=3)
        assert p.vocab_size() == 3
        assert p.logprob_next(["x"], "y") == pytest.approx(math.log(1 / 3), abs=1e-12)

    def test_rejects_bad_hyperparameters(self):
        with pytest.raises(ValueError):
            NgramProvider(["a"], order=0)
        with pytest.raises(ValueError):
            NgramProvider(["a"], alpha=0.0)

    def test_masked_index_out_of_range(self):
        p = NgramProvider(self.CORPUS, order=2)
        with pytest.raises(ValueError):
            p.logprob_masked(["a", "b"], 2)


@settings(max_examples=30, deadline=None)
@given(
    corpus=st.lists(st.text(alphabet="abc ", min_size=1, max_size=10), min_size=0, max_size=5),
    order=st.integers(min_value=1, max_value=3),
    prefix=st.lists(st.sampled_from(["a", "b", "zz"]), max_size=4),
)
def test_next_distribution_normalization_property(corpus, order, prefix):
    """For any trained provider and prefix, probabilities sum to 1."""
    p = NgramProvider(corpus, order=order, alpha=1.0)
    vocab = sorted(p._vocab)
    total = sum(math.exp(p.logprob_next(prefix, t)) for t in vocab)
    assert abs(total - 1.0) <= 1e-9


class TestSequenceScores:
    def test_ar_score_is_negative_mean(self):
        p = NgramProvider(["a b", "a c"], order=2)
        ss = score_autoregressive(p, ["a", "b"])
        expected = -(math.log(3 / 8) + math.log(2 / 8)) / 2
        assert ss.score == pytest.approx(expected, abs=1e-12)
        assert len(ss.per_token_logprobs) == 2

    def test_masked_equals_mean_of_single_mask_scores_exhaustive(self):
        """Checked on every sequence of length <= 6 over a tiny alphabet."""
        p = NgramProvider(["a b a", "b a b"], order=2)
        import itertools

        for n in range(1, 7):
            for tokens in itertools.product("ab", repeat=n):
                tokens = list(tokens)
                per_pos = [p.logprob_masked(tokens, i) for i in range(n)]
                expected = -sum(per_pos) / n
                assert score_masked(p, tokens).score == pytest.approx(expected, abs=1e-12)

    def test_masked_restricted_positions(self):
        p = NgramProvider(["a b c"], order=2)
        tokens = ["a", "b", "c"]
        ss = score_masked(p, tokens, maskable=[2, 0])
        expected = -(p.logprob_masked(tokens, 0) + p.logprob_masked(tokens, 2)) / 2
        assert ss.score == pytest.approx(expected, abs=1e-12)

    def test_empty_inputs_rejected(self):
        p = UniformProvider(4)
        with pytest.raises(ValueError):
            score_autoregressive(p, [])
        with pytest.raises(ValueError):
            score_masked(p, [])
        with pytest.raises(ValueError):
            score_masked(p, ["a"], maskable=[])

    def test_out_of_range_maskable_rejected(self):
        with pytest.raises(ValueError):
            score_masked(UniformProvider(4), ["a"], maskable=[1])

    def test_scored_sequence_requires_finite(self):
        with pytest.raises(ValueError):
            ScoredSequence.from_logprobs(["a"], [float("nan")])


class TestNonStopIndices:
    def test_pseudo_sentence(self):
        tokens = tokenize("book at location library")
        assert non_stop_indices(tokens) == [0, 2, 3]

    def test_all_stop_words(self):
        assert non_stop_indices(["the", "of", "at"]) == []


class TestSelectAnswer:
    def test_lowest_score_wins(self):
        assert select_answer([3.0, 1.0, 2.0]) == 1

    def test_ties_break_to_lowest_index(self):
        assert select_answer([2.0, 1.0, 1.0]) == 1
        assert select_answer([5.0, 5.0]) == 0

    def test_rejects_short_or_nonfinite(self):
        with pytest.raises(ValueError):
            select_answer([1.0])
        with pytest.raises(ValueError):
            select_answer([1.0, float("inf")])
        with pytest.raises(ValueError):
            select_answer([float("nan"), 1.0])


class _ExplodingProvider(UniformProvider):
    def __init__(self):
        super().__init__(4)

    def score_text(self, text, mode="ar", mask_stop_words=False):
        raise RuntimeError("backend on fire")


class TestScoreItem:
    TABLE = TemplateTable.from_pairs([], fallback=True)

    def test_in_vocab_gold_beats_unknown_distractors(self):
        provider = NgramProvider(["find dinner restaurant tasty"], order=2)
        item = QAItem(
            id="q1",
            question="find dinner?",
            options=["restaurant tasty", "qqq zzz"],
            answer_index=0,
        )
        scores, predicted = score_item(provider, item, self.TABLE, mode="ar")
        assert predicted == 0
        assert scores[0] < scores[1]

    def test_mlm_mode_with_stop_word_restriction(self):
        provider = NgramProvider(["book at location library"], order=2)
        item = QAItem(
            id="q2",
            question="where would the book be?",
            options=["location library", "qqq zzz"],
            answer_index=0,
        )
        scores, predicted = score_item(provider, item, self.TABLE, mode="mlm", mask_stop_words=True)
        assert predicted == 0

    def test_provider_failure_carries_item_id(self):
        item = QAItem(id="boom-7", question="q?", options=["a", "b"], answer_index=0)
        with pytest.raises(ScoringError) as err:
            score_item(_ExplodingProvider(), item, self.TABLE)
        assert "boom-7" in str(err.value)

    def test_unknown_mode_rejected(self):
        item = QAItem(id="q3", question="q?", options=["a", "b"], answer_index=0)
        with pytest.raises(ScoringError):
            score_item(UniformProvider(4), item, self.TABLE, mode="bidirectional")

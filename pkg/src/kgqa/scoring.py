"""Sequence scoring over pluggable token-probability providers.

A *provider* answers two kinds of log-probability queries over its own
vocabulary: next-token given a prefix, and single-token given bidirectional
context. On top of that contract live two sequence scores, both negative
mean token log-probability, so lower means more plausible:

* autoregressive: ``-(1/n) * sum_i log P(t_i | t_1..t_{i-1})`` over all ``n``
  tokens, the first conditioned on the sequence start;
* masked: ``-(1/n) * sum_{i in maskable} log P(t_i | rest)``, one token
  hidden at a time, where ``n`` is the number of masked positions (optionally
  restricted to non-stop tokens).

Answer selection over a set of candidate statements picks the lowest score,
ties broken toward the lowest index.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import ScoringError
from .synth import QAItem
from .text import STOP_WORDS, tokenize
from .verbalize import TemplateTable, apply_template

#: Reserved vocabulary symbols of the built-in n-gram provider.
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

SCORE_MODES = ("ar", "mlm")


@dataclass(frozen=True)
class ScoredSequence:
    """Tokens, their per-position log-probabilities, and the sequence score."""

    tokens: tuple[str, ...]
    per_token_logprobs: tuple[float, ...]
    score: float

    @classmethod
    def from_logprobs(cls, tokens: Sequence[str], logprobs: Sequence[float]) -> "ScoredSequence":
        if not logprobs:
            raise ValueError("cannot score an empty sequence")
        if any(not math.isfinite(lp) for lp in logprobs):
            raise ValueError("per-token log-probabilities must be finite")
        score = -sum(logprobs) / len(logprobs)
        return cls(tuple(tokens), tuple(logprobs), score)


class TokenProbabilityProvider(ABC):
    """Contract every built-in scoring backend implements.

    Implementations must be deterministic: identical queries return identical
    values. Log-probabilities are real and <= 0, and exponentiated values for
    a fixed context sum to 1 over the vocabulary.
    """

    @abstractmethod
    def vocab_size(self) -> int:
        """Number of entries in the provider's vocabulary (>= 2)."""

    @abstractmethod
    def logprob_next(self, prefix: Sequence[str], target: str) -> float:
        """log P(target | prefix); an empty prefix means sequence start."""

    @abstractmethod
    def logprob_masked(self, tokens: Sequence[str], index: int) -> float:
        """log P(tokens[index] | all other tokens), with that token hidden."""

    def score_text(self, text: str, mode: str = "ar", mask_stop_words: bool = False) -> ScoredSequence:
        """Tokenize with the built-in tokenizer and score under ``mode``."""
        if mode not in SCORE_MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {SCORE_MODES}")
        tokens = tokenize(text)
        if not tokens:
            raise ValueError(f"text {text!r} has no tokens")
        if mode == "ar":
            return score_autoregressive(self, tokens)
        maskable = non_stop_indices(tokens) if mask_stop_words else None
        return score_masked(self, tokens, maskable)


class UniformProvider(TokenProbabilityProvider):
    """Maximum-entropy provider: every token gets probability 1/V.

    Useful as a baseline and in tests — both sequence scores collapse to
    ``ln V`` exactly, for any input.
    """

    def __init__(self, vocab_size: int):
        if vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {vocab_size}")
        self._v = int(vocab_size)
        self._logp = -math.log(self._v)

    def vocab_size(self) -> int:
        return self._v

    def logprob_next(self, prefix: Sequence[str], target: str) -> float:
        return self._logp

    def logprob_masked(self, tokens: Sequence[str], index: int) -> float:
        if not (0 <= index < len(tokens)):
            raise ValueError(f"index {index} out of range for {len(tokens)} tokens")
        return self._logp


class NgramProvider(TokenProbabilityProvider):
    """Order-k n-gram model with additive (Laplace) smoothing.

    ``P(t | c) = (count(c, t) + alpha) / (count(c) + alpha * V)`` where ``c``
    is the length-(k-1) context, padded with ``<bos>``. Unseen contexts give
    exactly ``1/V`` for every token. The vocabulary is the corpus tokens plus
    ``<unk>``, ``<bos>``, ``<eos>``; out-of-vocabulary queries map to
    ``<unk>``. The masked query is the exact conditional of the n-gram joint:
    the product of every factor whose window covers the masked position,
    normalized over the vocabulary.
    """

    def __init__(self, corpus: Iterable[str | Sequence[str]], order: int = 3, alpha: float = 1.0):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not (alpha > 0):
            raise ValueError(f"alpha must be > 0, got {alpha}")
        self.order = order
        self.alpha = alpha
        sentences: list[list[str]] = []
        vocab: set[str] = set()
        for sent in corpus:
            toks = tokenize(sent) if isinstance(sent, str) else [str(t) for t in sent]
            if not toks:
                continue
            sentences.append(toks)
            vocab.update(toks)
        vocab.update((UNK, BOS, EOS))
        self._vocab = vocab
        self._vocab_list = sorted(vocab)
        self._counts: dict[tuple[str, ...], dict[str, int]] = {}
        self._totals: dict[tuple[str, ...], int] = {}
        pad = [BOS] * (order - 1)
        for toks in sentences:
            padded = [*pad, *toks, EOS]
            for j in range(order - 1, len(padded)):
                ctx = tuple(padded[j - order + 1 : j])
                nxt = padded[j]
                slot = self._counts.setdefault(ctx, {})
                slot[nxt] = slot.get(nxt, 0) + 1
                self._totals[ctx] = self._totals.get(ctx, 0) + 1

    def vocab_size(self) -> int:
        return len(self._vocab)

    def _map(self, token: str) -> str:
        return token if token in self._vocab else UNK

    def _cond_logprob(self, ctx: tuple[str, ...], target: str) -> float:
        v = len(self._vocab)
        total = self._totals.get(ctx, 0)
        count = self._counts.get(ctx, {}).get(target, 0)
        return math.log((count + self.alpha) / (total + self.alpha * v))

    def logprob_next(self, prefix: Sequence[str], target: str) -> float:
        padded = [BOS] * (self.order - 1) + [self._map(t) for t in prefix]
        ctx = tuple(padded[len(padded) - self.order + 1 :]) if self.order > 1 else ()
        return self._cond_logprob(ctx, self._map(target))

    def logprob_masked(self, tokens: Sequence[str], index: int) -> float:
        n = len(tokens)
        if not (0 <= index < n):
            raise ValueError(f"index {index} out of range for {n} tokens")
        mapped = [self._map(t) for t in tokens]
        target = mapped[index]
        scores = self._masked_candidate_scores(mapped, index)
        log_norm = _logsumexp(list(scores.values()))
        return scores[target] - log_norm

    def _masked_candidate_scores(self, mapped: list[str], index: int) -> dict[str, float]:
        """Unnormalized log-score of each vocabulary candidate at ``index``.

        Only factors whose context window covers ``index`` vary with the
        candidate, so the sum runs over positions ``index .. index+order-1``
        (clipped), with the end-of-sequence factor included when in range.
        """
        n = len(mapped)
        k = self.order
        pad = [BOS] * (k - 1)
        scores: dict[str, float] = {}
        last = min(index + k - 1, n)  # position n is the <eos> factor
        for cand in self._vocab_list:
            seq = [*pad, *mapped, EOS]
            seq[k - 1 + index] = cand
            total = 0.0
            for j in range(index, last + 1):
                p = k - 1 + j  # position in padded sequence
                ctx = tuple(seq[p - k + 1 : p]) if k > 1 else ()
                total += self._cond_logprob(ctx, seq[p])
            scores[cand] = total
        return scores


def _logsumexp(values: Sequence[float]) -> float:
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def non_stop_indices(tokens: Sequence[str]) -> list[int]:
    """Positions of tokens absent from the frozen stop-word list."""
    return [i for i, t in enumerate(tokens) if t not in STOP_WORDS]


def score_autoregressive(provider: TokenProbabilityProvider, tokens: Sequence[str]) -> ScoredSequence:
    """Negative mean next-token log-probability over all positions."""
    if not tokens:
        raise ValueError("cannot score an empty token sequence")
    logprobs = [provider.logprob_next(tokens[:i], tokens[i]) for i in range(len(tokens))]
    return ScoredSequence.from_logprobs(tokens, logprobs)


def score_masked(
    provider: TokenProbabilityProvider,
    tokens: Sequence[str],
    maskable: Iterable[int] | None = None,
) -> ScoredSequence:
    """Negative mean single-mask log-probability over ``maskable`` positions.

    ``maskable`` defaults to every position; the mean is taken over the
    masked positions only. An empty maskable set is an error.
    """
    if not tokens:
        raise ValueError("cannot score an empty token sequence")
    if maskable is None:
        positions = list(range(len(tokens)))
    else:
        positions = sorted(set(maskable))
        if not positions:
            raise ValueError("maskable set is empty")
        if positions[0] < 0 or positions[-1] >= len(tokens):
            raise ValueError(f"maskable positions {positions} out of range for {len(tokens)} tokens")
    logprobs = [provider.logprob_masked(tokens, i) for i in positions]
    score = -sum(logprobs) / len(logprobs)
    return ScoredSequence(tuple(tokens), tuple(logprobs), score)


def select_answer(scores: Sequence[float]) -> int:
    """Index of the lowest score; ties break toward the lowest index."""
    if len(scores) < 2:
        raise ValueError(f"need at least 2 scores, got {len(scores)}")
    if any(not math.isfinite(s) for s in scores):
        raise ValueError(f"scores must be finite, got {list(scores)}")
    return min(range(len(scores)), key=lambda i: scores[i])


def score_item(
    provider,
    item: QAItem,
    templates: TemplateTable,
    mode: str = "ar",
    mask_stop_words: bool = False,
) -> tuple[list[float], int]:
    """Score each option's statement and pick the answer.

    Every option is verbalized with :func:`apply_template` and scored under
    ``mode`` by the provider, which may be any object exposing
    ``score_text`` — built-in providers and external subprocess providers
    alike. Failures are re-raised as :class:`ScoringError` carrying the item
    id. Returns ``(scores, predicted_index)``.
    """
    scores: list[float] = []
    try:
        for option in item.options:
            statement = apply_template(item.context, item.question, option, templates)
            scores.append(provider.score_text(statement, mode, mask_stop_words).score)
        return scores, select_answer(scores)
    except ScoringError:
        raise
    except Exception as exc:
        raise ScoringError(item.id, str(exc)) from exc


def statements_for_item(item: QAItem, templates: TemplateTable) -> list[str]:
    """The per-option statements that :func:`score_item` would score."""
    return [apply_template(item.context, item.question, opt, templates) for opt in item.options]

"""Scoring sessions: configuration, capabilities, and the two score modes."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from .model import TinyTransformerLM, build_model
from .vocab import BOS_ID, DEFAULT_BUCKETS, MASK_ID, STOP_WORDS, WordVocab, tokenize

MODES = ("ar", "mlm")
DEFAULT_MAX_LEN = 128


class AdapterError(Exception):
    """A request that must be answered with an ``{"error": ...}`` object."""


@dataclass(frozen=True)
class SessionConfig:
    """Everything that determines a session's identity and its scores."""

    model: str = "tiny-transformer"
    seed: int = 0
    modes: tuple[str, ...] = MODES
    deterministic: bool = True
    max_len: int = DEFAULT_MAX_LEN
    device: str = "cpu"
    buckets: int = DEFAULT_BUCKETS

    def __post_init__(self):
        if not self.modes:
            raise ValueError("at least one mode is required")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"duplicate modes in {self.modes}")
        if self.max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {self.max_len}")


@dataclass
class AdapterSession:
    """One provider connection: a vocabulary plus one model per capability.

    In deterministic mode the torch thread pool is pinned to a single thread
    before any forward pass, so per-token log-probabilities — and therefore
    serialized response bytes — are identical run to run for the same config.
    Models for modes the session was not configured with are never built;
    requests for them are rejected, never approximated by the other model.
    """

    config: SessionConfig = field(default_factory=SessionConfig)

    def __post_init__(self):
        if self.config.deterministic:
            torch.set_num_threads(1)
        self._vocab = WordVocab(self.config.buckets)
        self._causal: TinyTransformerLM | None = None
        self._masked: TinyTransformerLM | None = None
        if "ar" in self.config.modes:
            self._causal = build_model(
                self.config.seed, self._vocab.size(), self.config.max_len, True, self.config.device
            )
        if "mlm" in self.config.modes:
            self._masked = build_model(
                self.config.seed + 1, self._vocab.size(), self.config.max_len, False, self.config.device
            )

    def hello(self) -> dict:
        return {"name": self.config.model, "vocab_size": self._vocab.size()}

    def score(self, text: str, mode: str, mask_stop_words: bool = False) -> dict:
        """Per-token log-probabilities for ``text`` under ``mode``.

        Raises :class:`AdapterError` for anything the wire protocol answers
        with an error object: unsupported mode, token-free or over-long text,
        or a stop-word filter that leaves nothing to score.
        """
        if mode not in MODES:
            raise AdapterError(f"unknown mode {mode!r}; expected one of {list(MODES)}")
        if mode not in self.config.modes:
            raise AdapterError(
                f"mode {mode!r} is not supported by this session; "
                f"supported modes: {', '.join(self.config.modes)}"
            )
        tokens = tokenize(text)
        if not tokens:
            raise AdapterError(f"text {text!r} has no tokens")
        if len(tokens) > self.config.max_len:
            raise AdapterError(
                f"text has {len(tokens)} tokens, exceeding the session limit of {self.config.max_len}"
            )
        ids = self._vocab.encode(tokens)
        if mode == "ar":
            logprobs = self._score_autoregressive(ids)
        else:
            positions = list(range(len(tokens)))
            if mask_stop_words:
                positions = [i for i in positions if tokens[i] not in STOP_WORDS]
                if not positions:
                    raise AdapterError("every token is a stop word; nothing to score")
            logprobs = self._score_masked(ids, positions)
        return {"per_token_logprobs": logprobs, "n": len(logprobs)}

    def _score_autoregressive(self, ids: list[int]) -> list[float]:
        """log P(t_i | t_1..t_{i-1}) for every i, the first conditioned on BOS."""
        assert self._causal is not None
        inputs = torch.tensor([[BOS_ID, *ids[:-1]]], dtype=torch.long)
        with torch.no_grad():
            logp = self._causal(inputs)[0]
        return [logp[i, ids[i]].item() for i in range(len(ids))]

    def _score_masked(self, ids: list[int], positions: list[int]) -> list[float]:
        """log P(t_i | rest), one position hidden at a time.

        One forward pass per position keeps every term independent of which
        other positions are being scored, so a stop-word-filtered request
        returns exactly the corresponding subset of the unfiltered terms.
        """
        assert self._masked is not None
        out = []
        for pos in positions:
            row = list(ids)
            row[pos] = MASK_ID
            with torch.no_grad():
                logp = self._masked(torch.tensor([row], dtype=torch.long))[0]
            out.append(logp[pos, ids[pos]].item())
        return out

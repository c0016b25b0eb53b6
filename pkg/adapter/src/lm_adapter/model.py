"""Tiny seeded transformer language models.

Two variants of the same single-layer encoder: a causal one for
left-to-right factorization and a bidirectional one for single-mask
pseudo-log-likelihood. Weights come from seeded random initialization — the
adapter is a *reference* provider whose contract is determinism and correct
protocol behavior, not linguistic quality. Swap this module's models for a
pretrained network to serve real scores; nothing else changes.
"""

from __future__ import annotations

import torch
from torch import nn


class TinyTransformerLM(nn.Module):
    """Embedding + positional embedding + transformer encoder + softmax head.

    ``causal=True`` applies an upper-triangular attention mask so position i
    sees only positions <= i; ``causal=False`` attends both ways. Forward
    returns log-probabilities (log-softmax over the vocabulary) for every
    position.
    """

    def __init__(
        self,
        vocab_size: int,
        max_len: int,
        causal: bool,
        d_model: int = 32,
        nhead: int = 2,
        dim_feedforward: int = 64,
        num_layers: int = 1,
    ):
        super().__init__()
        if vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {vocab_size}")
        if max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {max_len}")
        self.causal = causal
        self.max_len = max_len
        self.token_embedding = nn.Embedding(vocab_size, d_model)
        self.position_embedding = nn.Embedding(max_len, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model, nhead, dim_feedforward, dropout=0.0, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers, enable_nested_tensor=False)
        self.head = nn.Linear(d_model, vocab_size)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        """``[batch, n]`` int64 token ids -> ``[batch, n, vocab]`` log-probs."""
        _, n = ids.shape
        if n > self.max_len:
            raise ValueError(f"sequence length {n} exceeds max_len {self.max_len}")
        positions = torch.arange(n, device=ids.device).unsqueeze(0).expand_as(ids)
        x = self.token_embedding(ids) + self.position_embedding(positions)
        mask = None
        if self.causal:
            mask = torch.triu(torch.ones(n, n, dtype=torch.bool, device=ids.device), diagonal=1)
        x = self.encoder(x, mask=mask)
        return torch.log_softmax(self.head(x), dim=-1)


def build_model(seed: int, vocab_size: int, max_len: int, causal: bool, device: str) -> TinyTransformerLM:
    """A frozen, eval-mode model whose weights depend only on its arguments.

    Seeding happens immediately before construction so the weights are
    independent of whatever else the process has done with the global RNG
    (including building the other mode's model).
    """
    torch.manual_seed(seed)
    model = TinyTransformerLM(vocab_size, max_len, causal)
    model.to(torch.device(device))
    model.eval()
    for param in model.parameters():
        param.requires_grad_(False)
    return model

"""Training answer scorers: marginal ranking over options, and n-gram fitting.

The marginal-ranking loss for one item with option plausibilities
``s_1..s_m`` and gold index ``y`` is::

    L = (1/m) * sum_{i != y} max(0, eta - s_y + s_i)

i.e. the gold option should out-score every distractor by at least the margin
``eta``. Plausibilities are the *negated* sequence scores — higher means more
plausible — so prediction remains "lowest score wins" while the hinge keeps
its textbook orientation. The trainable scorer is a hashed bag-of-n-gram
linear model; its subgradient updates are plain SGD over per-item losses.

``train_mlm_style`` is the contrastive-free alternative: fit an n-gram
provider on question + correct-answer concatenations and let sequence
scoring do the rest.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from collections.abc import Sequence

import numpy as np

from .errors import DataError
from .scoring import NgramProvider
from .synth import QAItem
from .text import tokenize
from .verbalize import TemplateTable, apply_template

logger = logging.getLogger(__name__)

DEFAULT_DIM = 2**16


def mr_loss(scores: Sequence[float], y: int, eta: float = 1.0) -> float:
    """Marginal ranking loss of one item; ``scores`` are plausibilities."""
    m = len(scores)
    if m < 2:
        raise ValueError(f"need at least 2 scores, got {m}")
    if not (0 <= y < m):
        raise ValueError(f"gold index {y} out of range for {m} scores")
    if eta < 0:
        raise ValueError(f"margin eta must be >= 0, got {eta}")
    total = 0.0
    for i in range(m):
        if i != y:
            total += max(0.0, eta - scores[y] + scores[i])
    return total / m


def mr_loss_grad(scores: Sequence[float], y: int, eta: float = 1.0) -> list[float]:
    """Subgradient of :func:`mr_loss` with respect to each score.

    Each strictly active hinge term contributes ``+1/m`` at its distractor
    index and ``-1/m`` at the gold index; terms exactly at zero contribute
    nothing.
    """
    m = len(scores)
    if m < 2:
        raise ValueError(f"need at least 2 scores, got {m}")
    if not (0 <= y < m):
        raise ValueError(f"gold index {y} out of range for {m} scores")
    if eta < 0:
        raise ValueError(f"margin eta must be >= 0, got {eta}")
    grad = [0.0] * m
    for i in range(m):
        if i != y and (eta - scores[y] + scores[i]) > 0.0:
            grad[i] += 1.0 / m
            grad[y] -= 1.0 / m
    return grad


class LogLinearScorer:
    """Linear plausibility over hashed unigram+bigram counts.

    ``plausibility(text) = w . features(text)`` with features hashed into a
    fixed ``dim``-wide space. Prediction over candidate statements takes the
    highest plausibility (ties toward the lowest index), which is exactly
    lowest-score-wins on the negated values.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.weights = np.zeros(dim, dtype=np.float64)

    def _hash(self, data: str) -> int:
        digest = hashlib.blake2b(data.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def featurize(self, text: str) -> dict[int, float]:
        """Hashed counts of token unigrams and bigrams."""
        tokens = tokenize(text)
        feats: dict[int, float] = {}
        for tok in tokens:
            idx = self._hash("1\x1f" + tok)
            feats[idx] = feats.get(idx, 0.0) + 1.0
        for a, b in zip(tokens, tokens[1:]):
            idx = self._hash("2\x1f" + a + "\x1f" + b)
            feats[idx] = feats.get(idx, 0.0) + 1.0
        return feats

    def plausibility(self, text: str) -> float:
        return sum(self.weights[i] * c for i, c in self.featurize(text).items())

    def predict(self, statements: Sequence[str]) -> int:
        """Index of the most plausible statement (ties: lowest index)."""
        if len(statements) < 2:
            raise ValueError(f"need at least 2 statements, got {len(statements)}")
        plaus = [self.plausibility(s) for s in statements]
        return max(range(len(plaus)), key=lambda i: (plaus[i], -i))


def _item_statements(item: QAItem, templates: TemplateTable) -> list[str]:
    return [apply_template(item.context, item.question, opt, templates) for opt in item.options]


def train_scorer(
    items: Sequence[QAItem],
    templates: TemplateTable,
    epochs: int = 20,
    learning_rate: float = 0.1,
    eta: float = 1.0,
    seed: int = 0,
    dim: int = DEFAULT_DIM,
) -> LogLinearScorer:
    """Fit a :class:`LogLinearScorer` with SGD on the marginal-ranking loss.

    Items are shuffled once per epoch with a seeded rng, so training is
    deterministic in ``(items, seed)``. Items whose options all verbalize to
    the same statement carry no ranking signal and are skipped (with a
    warning tallying how many).
    """
    if not items:
        raise ValueError("cannot train on an empty item list")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if learning_rate <= 0:
        raise ValueError(f"learning_rate must be > 0, got {learning_rate}")
    if eta < 0:
        raise ValueError(f"margin eta must be >= 0, got {eta}")

    scorer = LogLinearScorer(dim)
    prepared: list[tuple[list[dict[int, float]], int]] = []
    skipped = 0
    for item in items:
        statements = _item_statements(item, templates)
        if len(set(statements)) == 1:
            skipped += 1
            continue
        prepared.append(([scorer.featurize(s) for s in statements], item.answer_index))
    if skipped:
        logger.warning("train_scorer: skipped %d degenerate item(s) with identical statements", skipped)
    if not prepared:
        raise ValueError("all items were degenerate; nothing to train on")

    rng = random.Random(seed)
    order = list(range(len(prepared)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            feats, y = prepared[idx]
            plaus = [sum(scorer.weights[i] * c for i, c in f.items()) for f in feats]
            grad = mr_loss_grad(plaus, y, eta)
            for g, f in zip(grad, feats):
                if g != 0.0:
                    step = learning_rate * g
                    for i, c in f.items():
                        scorer.weights[i] -= step * c
    return scorer


def training_loss(
    scorer: LogLinearScorer,
    items: Sequence[QAItem],
    templates: TemplateTable,
    eta: float = 1.0,
) -> float:
    """Mean marginal-ranking loss of a scorer over an item set."""
    if not items:
        raise ValueError("cannot compute loss on an empty item list")
    total = 0.0
    for item in items:
        plaus = [scorer.plausibility(s) for s in _item_statements(item, templates)]
        total += mr_loss(plaus, item.answer_index, eta)
    return total / len(items)


def train_mlm_style(items: Sequence[QAItem], order: int = 3, alpha: float = 1.0) -> NgramProvider:
    """Fit an n-gram provider on question + correct-answer concatenations."""
    if not items:
        raise ValueError("cannot train on an empty item list")
    corpus = [f"{item.question} {item.answer}" for item in items]
    return NgramProvider(corpus, order=order, alpha=alpha)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(
    scorer: LogLinearScorer,
    path: str,
    seed: int = 0,
    eta: float = 1.0,
    learning_rate: float = 0.1,
    epochs: int = 0,
) -> None:
    """Write the flat weight vector with a self-describing header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# kgqa-loglinear v1\n")
        fh.write(f"# dim={scorer.dim}\n")
        fh.write(f"# seed={seed}\n")
        fh.write(f"# eta={eta!r}\n")
        fh.write(f"# lr={learning_rate!r}\n")
        fh.write(f"# epochs={epochs}\n")
        for w in scorer.weights:
            fh.write(repr(float(w)) + "\n")


def load_checkpoint(path: str) -> tuple[LogLinearScorer, dict]:
    """Read a checkpoint back; returns the scorer and its header metadata."""
    meta: dict = {}
    weights: list[float] = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "# kgqa-loglinear v1":
            raise DataError(f"not a scorer checkpoint: unexpected first line {first!r}")
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                body = line.lstrip("# ").strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if line:
                weights.append(float(line))
    try:
        dim = int(meta["dim"])
    except (KeyError, ValueError):
        raise DataError("checkpoint header is missing a valid dim") from None
    if len(weights) != dim:
        raise DataError(f"checkpoint has {len(weights)} weights but header says dim={dim}")
    if any(not math.isfinite(w) for w in weights):
        raise DataError("checkpoint contains non-finite weights")
    scorer = LogLinearScorer(dim)
    scorer.weights = np.asarray(weights, dtype=np.float64)
    return scorer, meta

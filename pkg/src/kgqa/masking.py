"""Masked pretraining corpus construction.

Each sentence gets a fixed masking quota — ``round(rate * eligible)``
positions, at least one whenever anything is eligible — drawn uniformly
without replacement from its eligible positions. Structural tokens
(angle-bracketed relation markers and ``<blank>`` placeholders) are never
eligible; the ``TAIL_ONLY`` strategy further restricts eligibility to
positions at or past the sentence's tail boundary, which concentrates the
signal on the part of a verbalized triple worth predicting.

Per-sentence seeds are derived from the run seed and the sentence index, so
the corpus is reproducible regardless of processing order.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass

from .seeds import derived_rng
from .text import is_structural_token

logger = logging.getLogger(__name__)

MASK_TOKEN = "[MASK]"


class MaskStrategy(enum.Enum):
    ALL = "all"
    TAIL_ONLY = "tail_only"


@dataclass(frozen=True)
class MaskedCorpusRecord:
    """One masked sentence: originals, masked copy, and where the masks went.

    ``mask_positions`` is sorted ascending; replacing the masked positions
    with the originals reconstructs the sentence exactly. ``span_tag`` holds
    the (head_end, tail_start) boundary for tail-restricted masking.
    """

    original_tokens: tuple[str, ...]
    masked_tokens: tuple[str, ...]
    mask_positions: tuple[int, ...]
    span_tag: tuple[int, int] | None = None


def _quota(eligible: int, rate: float) -> int:
    if eligible <= 0:
        return 0
    return max(1, round(rate * eligible))


def mask_corpus(
    sentences: Sequence[str | Sequence[str]],
    rate: float = 0.15,
    seed: int = 0,
    strategy: MaskStrategy = MaskStrategy.ALL,
    boundaries: Sequence[tuple[int, int]] | None = None,
) -> list[MaskedCorpusRecord]:
    """Mask every sentence at the per-sentence quota; deterministic in seed.

    ``sentences`` may be strings (whitespace-split) or pre-tokenized lists.
    ``boundaries`` — one ``(head_end, tail_start)`` pair per sentence — is
    required for :attr:`MaskStrategy.TAIL_ONLY` and must not be passed
    otherwise. Sentences with no eligible positions produce records with zero
    masks and are tallied in a warning.
    """
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    if strategy is MaskStrategy.TAIL_ONLY:
        if boundaries is None:
            raise ValueError("TAIL_ONLY masking requires per-sentence boundaries")
        if len(boundaries) != len(sentences):
            raise ValueError(
                f"got {len(boundaries)} boundaries for {len(sentences)} sentences"
            )
    elif boundaries is not None:
        raise ValueError("boundaries are only meaningful with TAIL_ONLY masking")

    records: list[MaskedCorpusRecord] = []
    empty = 0
    for idx, sent in enumerate(sentences):
        tokens = tuple(sent.split() if isinstance(sent, str) else (str(t) for t in sent))
        span_tag: tuple[int, int] | None = None
        eligible = [i for i, tok in enumerate(tokens) if not is_structural_token(tok)]
        if strategy is MaskStrategy.TAIL_ONLY:
            head_end, tail_start = boundaries[idx]  # type: ignore[index]
            if not (0 <= head_end <= tail_start <= len(tokens)):
                raise ValueError(
                    f"sentence {idx}: invalid boundary (head_end={head_end}, "
                    f"tail_start={tail_start}) for {len(tokens)} tokens"
                )
            span_tag = (head_end, tail_start)
            eligible = [i for i in eligible if i >= tail_start]
        k = _quota(len(eligible), rate)
        if k == 0:
            empty += 1
            records.append(MaskedCorpusRecord(tokens, tokens, (), span_tag))
            continue
        rng = derived_rng(seed, "mask", idx)
        positions = tuple(sorted(rng.sample(eligible, k)))
        masked = list(tokens)
        for p in positions:
            masked[p] = MASK_TOKEN
        records.append(MaskedCorpusRecord(tokens, tuple(masked), positions, span_tag))
    if empty:
        logger.warning("mask_corpus: %d sentence(s) had no eligible positions", empty)
    return records


def reconstruct(record: MaskedCorpusRecord) -> tuple[str, ...]:
    """Undo the masking of a record (used to verify the invariant)."""
    tokens = list(record.masked_tokens)
    for p in record.mask_positions:
        tokens[p] = record.original_tokens[p]
    return tuple(tokens)


def atomic_tail_boundary(tokens: Sequence[str]) -> tuple[int, int]:
    """(head_end, tail_start) around the single ``<relation>`` marker token.

    For event sentences shaped ``head <relation> tail`` the boundary is the
    marker's position and the position after it. Raises when no marker (or
    more than one) is present.
    """
    markers = [i for i, t in enumerate(tokens) if is_structural_token(t) and t != "<blank>"]
    if len(markers) != 1:
        raise ValueError(
            f"expected exactly one relation marker token, found {len(markers)} in {list(tokens)!r}"
        )
    return markers[0], markers[0] + 1


def records_to_tsv(records: Sequence[MaskedCorpusRecord]) -> str:
    """``original<TAB>masked<TAB>comma-joined positions`` per record."""
    lines = []
    for r in records:
        lines.append(
            "\t".join(
                [
                    " ".join(r.original_tokens),
                    " ".join(r.masked_tokens),
                    ",".join(str(p) for p in r.mask_positions),
                ]
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def write_masked_tsv(records: Sequence[MaskedCorpusRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_tsv(records))

"""Synthetic multiple-choice QA generation from a knowledge graph.

Each eligible triple (head, relation, tail) becomes one item: the head and
relation are turned into a question, the tail is the correct option, and
distractors are tails of *other* triples with the same relation. Two guards
keep the distractors honest:

* tails that co-occur with the same (head, relation) are excluded, so a true
  alternative answer is never presented as wrong;
* candidates whose content tokens overlap the correct option by more than
  half are excluded, so near-paraphrases of the answer don't sneak in.

All randomness is derived per item from the run seed and the triple id, which
makes generation deterministic under any execution order, including a thread
pool.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import BenchmarkError
from .kg import KnowledgeGraph, SpatialClassTaxonomy, Triple
from .seeds import derived_rng
from .text import content_tokens, normalize_whitespace, tokenize
from .verbalize import TemplateTable, question_for_triple


@dataclass
class QAItem:
    """One multiple-choice question.

    ``options`` are pairwise distinct after whitespace normalization and
    ``answer_index`` points at the correct one. ``meta`` carries optional
    provenance (source triple, relation, question type, concepts).
    """

    id: str
    question: str
    options: list[str]
    answer_index: int
    context: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("item id must be non-empty")
        if len(self.options) < 2:
            raise ValueError(f"item {self.id}: needs at least 2 options")
        normalized = [normalize_whitespace(o) for o in self.options]
        if any(not o for o in normalized):
            raise ValueError(f"item {self.id}: options must be non-empty")
        if len(set(normalized)) != len(normalized):
            raise ValueError(f"item {self.id}: options must be pairwise distinct")
        if not (0 <= self.answer_index < len(self.options)):
            raise ValueError(
                f"item {self.id}: answer_index {self.answer_index} out of range "
                f"for {len(self.options)} options"
            )

    @property
    def answer(self) -> str:
        return self.options[self.answer_index]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "context": self.context,
            "question": self.question,
            "options": list(self.options),
            "answer_index": self.answer_index,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "QAItem":
        return cls(
            id=str(obj["id"]),
            context=obj.get("context", "") or "",
            question=obj["question"],
            options=list(obj["options"]),
            answer_index=int(obj["answer_index"]),
            meta=dict(obj.get("meta", {})),
        )


def _overlap_fraction(candidate: str, gold: str) -> float:
    """Fraction of the candidate's content tokens that also occur in gold."""
    cand = set(content_tokens(candidate))
    if not cand:
        return 0.0
    gold_set = set(content_tokens(gold))
    return len(cand & gold_set) / len(cand)


def _synthesize_one(
    kg: KnowledgeGraph,
    idx: int,
    num_options: int,
    seed: int,
    relation_tails: dict[str, list[str]],
    tails_by_head_relation: dict[tuple[str, str], set[str]],
) -> QAItem | None:
    triple = kg[idx]
    question = question_for_triple(triple.relation, triple.head)
    if question is None:
        return None
    gold = triple.tail
    excluded = tails_by_head_relation[(triple.head, triple.relation)]
    pool = [
        tail
        for tail in relation_tails[triple.relation]
        if tail not in excluded and _overlap_fraction(tail, gold) <= 0.5
    ]
    if len(pool) < num_options - 1:
        return None
    rng = derived_rng(seed, idx)
    distractors = rng.sample(pool, num_options - 1)
    options = [gold, *distractors]
    rng.shuffle(options)
    return QAItem(
        id=f"syn-{idx:05d}",
        question=question,
        options=options,
        answer_index=options.index(gold),
        meta={
            "relation": triple.relation,
            "question_type": triple.relation,
            "source_triple": triple.to_dict(),
        },
    )


def synthesize_qa(
    kg: KnowledgeGraph,
    templates: TemplateTable,
    num_options: int = 3,
    seed: int = 0,
    workers: int = 1,
) -> list[QAItem]:
    """One item per eligible triple, deterministic in (kg, seed).

    A triple is eligible when its relation has a question form and enough
    valid distractor tails exist; others are skipped. ``templates`` is the
    table later used to verbalize the items for scoring — synthesis itself
    only needs the relation question forms, but callers pass the table here
    so an item set and its statement forms travel together. ``workers``
    controls a thread pool; the output is identical for any worker count.
    """
    if num_options < 2:
        raise ValueError(f"num_options must be >= 2, got {num_options}")
    del templates  # reserved: question forms are fixed per relation

    relation_tails: dict[str, list[str]] = {}
    tails_by_head_relation: dict[tuple[str, str], set[str]] = {}
    for t in kg:
        relation_tails.setdefault(t.relation, []).append(t.tail)
        tails_by_head_relation.setdefault((t.head, t.relation), set()).add(t.tail)
    # Deduplicate pools, keeping first-occurrence order.
    for rel, tails in relation_tails.items():
        relation_tails[rel] = list(dict.fromkeys(tails))

    def gen(idx: int) -> QAItem | None:
        return _synthesize_one(kg, idx, num_options, seed, relation_tails, tails_by_head_relation)

    if workers <= 1:
        results = [gen(i) for i in range(len(kg))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(gen, range(len(kg))))
    return [item for item in results if item is not None]


# ---------------------------------------------------------------------------
# Span masking and spatial questions
# ---------------------------------------------------------------------------


def mask_span(sentence: str, span_start: int, span_len: int) -> str:
    """Replace a token span with a single ``[MASK]`` token.

    Token positions refer to whitespace-split tokens of ``sentence``. The
    span must be non-empty and lie within bounds.
    """
    tokens = sentence.split()
    if span_len < 1:
        raise ValueError(f"span_len must be >= 1, got {span_len}")
    if span_start < 0 or span_start + span_len > len(tokens):
        raise ValueError(
            f"span [{span_start}, {span_start + span_len}) out of bounds "
            f"for {len(tokens)} tokens"
        )
    return " ".join([*tokens[:span_start], "[MASK]", *tokens[span_start + span_len :]])


def make_spatial_masked_question(
    triple: Triple,
    taxonomy: SpatialClassTaxonomy,
    num_options: int = 4,
    seed: int = 0,
    item_key: int | str = 0,
) -> QAItem | None:
    """Turn a spatial triple into a masked-relation question, if applicable.

    ``(bike, near, trees)`` becomes the question ``"bike [MASK] trees"`` whose
    options are spatial class ids with the triple's own class correct.
    Triples whose relation is not in the taxonomy, or taxonomies with too few
    classes for ``num_options``, yield ``None``.
    """
    if num_options < 2:
        raise ValueError(f"num_options must be >= 2, got {num_options}")
    class_id = taxonomy.class_of(triple.relation)
    if class_id is None:
        return None
    other_classes = [c for c in taxonomy.class_ids() if c != class_id]
    if len(other_classes) < num_options - 1:
        return None
    head = normalize_whitespace(triple.head).lower()
    tail = normalize_whitespace(triple.tail).lower()
    relation = normalize_whitespace(triple.relation).lower()
    sentence = " ".join(p for p in (head, relation, tail) if p)
    head_len = len(head.split())
    question = mask_span(sentence, head_len, len(relation.split()))
    rng = derived_rng(seed, "spatial", item_key)
    options = [class_id, *rng.sample(other_classes, num_options - 1)]
    rng.shuffle(options)
    return QAItem(
        id=f"spatial-{item_key}",
        question=question,
        options=options,
        answer_index=options.index(class_id),
        meta={
            "relation": triple.relation,
            "question_type": "spatial",
            "spatial_class": class_id,
            "source_triple": triple.to_dict(),
        },
    )


def synthesize_spatial_qa(
    kg: KnowledgeGraph,
    taxonomy: SpatialClassTaxonomy,
    num_options: int = 4,
    seed: int = 0,
) -> list[QAItem]:
    """Masked-relation questions for every spatial triple, consolidated.

    Triples that agree on (head tokens, spatial class, tail tokens) collapse
    to the first one seen, so the emitted set never asks the same masked
    question with the same answer twice.
    """
    items: list[QAItem] = []
    seen: set[tuple[tuple[str, ...], str, tuple[str, ...]]] = set()
    for idx, triple in enumerate(kg):
        class_id = taxonomy.class_of(triple.relation)
        if class_id is None:
            continue
        key = (tuple(tokenize(triple.head)), class_id, tuple(tokenize(triple.tail)))
        if key in seen:
            continue
        item = make_spatial_masked_question(triple, taxonomy, num_options, seed, item_key=idx)
        if item is None:
            continue
        seen.add(key)
        item.id = f"spatial-{idx:05d}"
        items.append(item)
    return items


# ---------------------------------------------------------------------------
# JSONL I/O
# ---------------------------------------------------------------------------


def items_to_jsonl(items: Iterable[QAItem]) -> str:
    """Serialize items to line-delimited JSON with stable key order."""
    lines = [json.dumps(item.to_dict(), sort_keys=True, ensure_ascii=False) for item in items]
    return "\n".join(lines) + ("\n" if lines else "")


def write_items_jsonl(items: Sequence[QAItem], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(items_to_jsonl(items))


def parse_items_jsonl(lines: Iterable[str]) -> list[QAItem]:
    """Parse line-delimited JSON items, with 1-based line numbers on errors."""
    items: list[QAItem] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BenchmarkError(f"invalid JSON: {exc}", lineno) from None
        if not isinstance(obj, dict):
            raise BenchmarkError("each line must be a JSON object", lineno)
        try:
            items.append(QAItem.from_dict(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise BenchmarkError(f"invalid item: {exc}", lineno) from None
    return items

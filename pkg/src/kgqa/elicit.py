"""Eliciting graph knowledge connected to question/answer text.

Concepts are contiguous n-grams (stop words removed) extracted from free
text; a triple "connects" a question to an answer option when its head
matches a concept on one side and its tail a concept on the other. The same
machinery classifies questions by the relation of their strongest connecting
triple and pulls the spatially phrased subset out of a benchmark.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib import resources

from .kg import KnowledgeGraph, SpatialClassTaxonomy, Triple
from .synth import QAItem
from .text import STOP_WORDS, normalize_phrase, tokenize


@dataclass(frozen=True)
class ConceptMatchConfig:
    """Knobs for concept extraction and matching.

    ``max_phrase_len`` bounds extracted n-gram length; ``stop_words`` are
    removed before n-grams are formed; ``relaxed`` switches triple-concept
    matching from exact phrase equality to content-token containment.
    """

    max_phrase_len: int = 4
    stop_words: frozenset[str] = field(default_factory=lambda: STOP_WORDS)
    relaxed: bool = True

    def __post_init__(self) -> None:
        if self.max_phrase_len < 1:
            raise ValueError(f"max_phrase_len must be >= 1, got {self.max_phrase_len}")


def extract_concepts(text: str, config: ConceptMatchConfig | None = None) -> set[str]:
    """All contiguous n-grams (lengths 1..max) of the stop-filtered tokens.

    Text is lowercased and punctuation-stripped first; stop words are removed
    before n-grams are formed, so phrases bridge dropped function words
    ("a revolving door" yields "revolving door").
    """
    config = config or ConceptMatchConfig()
    tokens = [t for t in tokenize(text) if t not in config.stop_words]
    phrases: set[str] = set()
    for n in range(1, config.max_phrase_len + 1):
        for i in range(len(tokens) - n + 1):
            phrases.add(" ".join(tokens[i : i + n]))
    return phrases


def _in_order_subsequence(needle: Sequence[str], haystack: Sequence[str]) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


def _concept_matches(concept: str, phrases: set[str], config: ConceptMatchConfig) -> bool:
    """Does a triple concept match any extracted phrase?

    Strict mode: exact phrase equality on the normalized concept. Relaxed
    mode additionally accepts a phrase containing all of the concept's
    content tokens — order-insensitively for concepts of one or two content
    tokens, in order for longer ones.
    """
    if normalize_phrase(concept) in phrases:
        return True
    if not config.relaxed:
        return False
    ct = [t for t in tokenize(concept) if t not in config.stop_words]
    if not ct:
        return False
    for phrase in phrases:
        ptoks = phrase.split()
        if len(ct) <= 2:
            if set(ct) <= set(ptoks):
                return True
        elif _in_order_subsequence(ct, ptoks):
            return True
    return False


def find_connecting_triples(
    kg: KnowledgeGraph,
    question: str,
    option: str,
    config: ConceptMatchConfig | None = None,
) -> list[Triple]:
    """Triples linking question concepts to option concepts, either direction.

    A triple qualifies when its head matches a question concept and its tail
    an option concept, or vice versa. Results keep graph order and are free
    of duplicates. Strict results are always a subset of relaxed results on
    the same inputs.
    """
    config = config or ConceptMatchConfig()
    q_phrases = extract_concepts(question, config)
    o_phrases = extract_concepts(option, config)
    out: list[Triple] = []
    for triple in kg:
        head_q = _concept_matches(triple.head, q_phrases, config)
        tail_o = _concept_matches(triple.tail, o_phrases, config)
        if head_q and tail_o:
            out.append(triple)
            continue
        head_o = _concept_matches(triple.head, o_phrases, config)
        tail_q = _concept_matches(triple.tail, q_phrases, config)
        if head_o and tail_q:
            out.append(triple)
    return out


def classify_question_type(
    kg: KnowledgeGraph,
    question_concept: str,
    answer_concept: str,
) -> str | None:
    """Relation label of the strongest triple joining two concepts.

    Both concepts are matched exactly (after normalization) against triple
    heads/tails in either direction. Among connecting triples the highest
    weight wins; ties break toward the lexicographically smallest relation
    label. Returns ``None`` when nothing connects the pair.
    """
    qc = normalize_phrase(question_concept)
    ac = normalize_phrase(answer_concept)
    if not qc or not ac:
        return None
    best: tuple[float, str] | None = None
    for triple in kg:
        h = normalize_phrase(triple.head)
        t = normalize_phrase(triple.tail)
        if (h == qc and t == ac) or (h == ac and t == qc):
            cand = (triple.weight, triple.relation)
            if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
    return None if best is None else best[1]


# ---------------------------------------------------------------------------
# Spatial subset extraction
# ---------------------------------------------------------------------------


def load_lexicon_lines(lines: Iterable[str]) -> list[str]:
    """Read one surface pattern per line, skipping blanks and comments."""
    patterns = []
    for raw in lines:
        line = raw.strip()
        if line and not line.startswith("#"):
            patterns.append(" ".join(line.lower().split()))
    return list(dict.fromkeys(patterns))


def default_spatial_lexicon() -> list[str]:
    """The curated spatial pattern lexicon shipped with the package."""
    data = resources.files("kgqa.data").joinpath("spatial_lexicon.txt").read_text("utf-8")
    return load_lexicon_lines(data.splitlines())


def load_lexicon(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon_lines(fh)


def _contains_pattern(tokens: Sequence[str], pattern_tokens: Sequence[str]) -> bool:
    n = len(pattern_tokens)
    if n == 0 or n > len(tokens):
        return False
    needle = tuple(pattern_tokens)
    return any(tuple(tokens[i : i + n]) == needle for i in range(len(tokens) - n + 1))


def extract_spatial_subset(
    items: Sequence[QAItem],
    taxonomy: SpatialClassTaxonomy,
    lexicon: Sequence[str] | None = None,
    include_options: bool = True,
) -> list[QAItem]:
    """Items whose question (or, optionally, any option) is spatially phrased.

    A text counts as spatial when it contains any taxonomy member or lexicon
    pattern as a contiguous token sequence. Order is preserved and items are
    never duplicated; ``include_options`` widens the scan from the question
    (plus context) to the options as well.
    """
    if lexicon is None:
        lexicon = default_spatial_lexicon()
    patterns = {tuple(p.split()) for p in lexicon}
    patterns.update(tuple(m.split()) for m in taxonomy.members())

    subset: list[QAItem] = []
    for item in items:
        texts = [item.context + " " + item.question]
        if include_options:
            texts.extend(item.options)
        found = False
        for text in texts:
            toks = tokenize(text)
            if any(_contains_pattern(toks, p) for p in patterns):
                found = True
                break
        if found:
            subset.append(item)
    return subset


def spatial_subset_summary(task_name: str, total: int, extracted: int) -> str:
    """One TSV row of per-benchmark extraction counts."""
    return f"{task_name}\t{total}\t{extracted}"

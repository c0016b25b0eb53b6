"""Knowledge-graph triple store: parsing, indexing, filtering, taxonomy.

Triples are (head, relation, tail, weight, source) tuples ingested from a
five-column TSV export. The store is immutable after construction and keeps
token-level indexes over heads and tails so concept lookups don't rescan the
triple list. A small spatial-class taxonomy maps surface relation labels
("near", "on top of", ...) onto coarse spatial classes.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from importlib import resources

from .errors import KGParseError, TaxonomyError
from .text import normalize_whitespace, tokenize


class Source(enum.Enum):
    """Provenance of a triple; the set of recognized upstream graphs."""

    CONCEPTNET = "CONCEPTNET"
    ATOMIC = "ATOMIC"
    WORDNET = "WORDNET"
    WIKIDATA = "WIKIDATA"
    VISUALGENOME = "VISUALGENOME"


@dataclass(frozen=True)
class Triple:
    """One knowledge-graph assertion.

    ``head`` and ``tail`` are concept phrases, ``relation`` a label such as
    ``AtLocation`` or a surface preposition such as ``near``. ``weight`` is a
    non-negative strength (occurrence count, annotator confidence, ...).
    """

    head: str
    relation: str
    tail: str
    weight: float = 1.0
    source: Source = Source.CONCEPTNET

    def __post_init__(self) -> None:
        if not self.head.strip():
            raise ValueError("triple head must be non-empty")
        if not self.relation.strip():
            raise ValueError("triple relation must be non-empty")
        if not self.tail.strip():
            raise ValueError("triple tail must be non-empty")
        if not (isinstance(self.weight, (int, float)) and math.isfinite(self.weight)):
            raise ValueError(f"triple weight must be finite, got {self.weight!r}")
        if self.weight < 0:
            raise ValueError(f"triple weight must be >= 0, got {self.weight}")

    def key(self) -> tuple[str, str, str]:
        """Identity used for duplicate detection: (head, relation, tail)."""
        return (self.head, self.relation, self.tail)

    def to_dict(self) -> dict:
        return {
            "head": self.head,
            "relation": self.relation,
            "tail": self.tail,
            "weight": self.weight,
            "source": self.source.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Triple":
        return cls(
            head=obj["head"],
            relation=obj["relation"],
            tail=obj["tail"],
            weight=float(obj.get("weight", 1.0)),
            source=Source(obj.get("source", "CONCEPTNET")),
        )


class KnowledgeGraph:
    """Immutable collection of triples with relation and token indexes.

    Triple ids are positions in the ingested order. The token indexes map
    each tokenized head/tail word to the ascending list of triple ids whose
    head/tail contains it.
    """

    def __init__(self, triples: Iterable[Triple]):
        self._triples: tuple[Triple, ...] = tuple(triples)
        by_relation: dict[str, list[int]] = {}
        by_head_token: dict[str, list[int]] = {}
        by_tail_token: dict[str, list[int]] = {}
        for idx, t in enumerate(self._triples):
            by_relation.setdefault(t.relation, []).append(idx)
            for tok in set(tokenize(t.head)):
                by_head_token.setdefault(tok, []).append(idx)
            for tok in set(tokenize(t.tail)):
                by_tail_token.setdefault(tok, []).append(idx)
        self._by_relation = by_relation
        self._by_head_token = by_head_token
        self._by_tail_token = by_tail_token

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __getitem__(self, idx: int) -> Triple:
        return self._triples[idx]

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    def relations(self) -> list[str]:
        """Distinct relation labels in first-occurrence order."""
        return list(self._by_relation)

    def ids_for_relation(self, relation: str) -> list[int]:
        return list(self._by_relation.get(relation, ()))

    def triples_for_relation(self, relation: str) -> list[Triple]:
        return [self._triples[i] for i in self._by_relation.get(relation, ())]

    def ids_for_head_token(self, token: str) -> list[int]:
        return list(self._by_head_token.get(token, ()))

    def ids_for_tail_token(self, token: str) -> list[int]:
        return list(self._by_tail_token.get(token, ()))


_VALID_SOURCES = {s.value for s in Source}


def parse_kg_tsv(lines: Iterable[str]) -> KnowledgeGraph:
    """Parse a five-column TSV export into a :class:`KnowledgeGraph`.

    Columns are ``head<TAB>relation<TAB>tail<TAB>weight<TAB>source``. Lines
    starting with ``#`` and blank lines are skipped. Head and tail are
    lowercased and whitespace-normalized on ingestion. Any malformed line
    raises :class:`KGParseError` carrying its 1-based line number.
    """
    triples: list[Triple] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise KGParseError(f"expected 5 tab-separated columns, got {len(cols)}", lineno)
        head, relation, tail, weight_s, source_s = cols
        head = normalize_whitespace(head).lower()
        relation = normalize_whitespace(relation)
        tail = normalize_whitespace(tail).lower()
        source_s = source_s.strip()
        if not head or not relation or not tail:
            raise KGParseError("head, relation, and tail must be non-empty", lineno)
        try:
            weight = float(weight_s)
        except ValueError:
            raise KGParseError(f"weight {weight_s!r} is not a number", lineno) from None
        if not math.isfinite(weight) or weight < 0:
            raise KGParseError(f"weight must be finite and >= 0, got {weight_s}", lineno)
        if source_s not in _VALID_SOURCES:
            raise KGParseError(
                f"unknown source {source_s!r}; expected one of "
                f"{sorted(_VALID_SOURCES)}",
                lineno,
            )
        triples.append(Triple(head, relation, tail, weight, Source(source_s)))
    return KnowledgeGraph(triples)


def kg_to_tsv(kg: KnowledgeGraph) -> str:
    """Serialize a graph back to the five-column TSV format (LF newlines)."""
    lines = []
    for t in kg:
        lines.append("\t".join([t.head, t.relation, t.tail, repr(float(t.weight)), t.source.value]))
    return "\n".join(lines) + ("\n" if lines else "")


def filter_by_frequency(kg: KnowledgeGraph, min_occurrences: int = 4) -> KnowledgeGraph:
    """Keep triples observed at least ``min_occurrences`` times, deduplicated.

    Occurrences of an identical (head, relation, tail) are counted as the sum
    of entry weights — raw exports carry weight 1 per observation, so this is
    plain duplicate counting there, while a previously filtered graph (whose
    weights already are occurrence counts) passes through unchanged, making
    the operation idempotent. Kept triples appear once, in first-occurrence
    order, with weight set to the occurrence count and the first occurrence's
    source.
    """
    if min_occurrences < 1:
        raise ValueError(f"min_occurrences must be >= 1, got {min_occurrences}")
    counts: dict[tuple[str, str, str], float] = {}
    first: dict[tuple[str, str, str], Triple] = {}
    order: list[tuple[str, str, str]] = []
    for t in kg:
        k = t.key()
        if k not in counts:
            counts[k] = 0.0
            first[k] = t
            order.append(k)
        counts[k] += t.weight
    kept = [
        Triple(first[k].head, first[k].relation, first[k].tail, counts[k], first[k].source)
        for k in order
        if counts[k] >= min_occurrences
    ]
    return KnowledgeGraph(kept)


# ---------------------------------------------------------------------------
# Spatial class taxonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpatialClassTaxonomy:
    """Partition of surface relation labels into coarse spatial classes.

    ``classes`` maps a class id (e.g. ``ABOVE``) to the frozen set of member
    surface forms (e.g. ``above``, ``over``, ``on top of``). Member sets must
    be pairwise disjoint so classification is unambiguous.
    """

    classes: dict[str, frozenset[str]]
    _member_to_class: dict[str, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        member_to_class: dict[str, str] = {}
        for class_id, members in self.classes.items():
            if not class_id.strip():
                raise TaxonomyError("class id must be non-empty")
            if not members:
                raise TaxonomyError(f"class {class_id!r} has no members")
            for m in members:
                if m in member_to_class:
                    raise TaxonomyError(
                        f"member {m!r} appears in both {member_to_class[m]!r} "
                        f"and {class_id!r}; classes must be disjoint"
                    )
                member_to_class[m] = class_id
        object.__setattr__(self, "_member_to_class", member_to_class)

    def class_ids(self) -> list[str]:
        return list(self.classes)

    def class_of(self, relation: str) -> str | None:
        """Class id for a surface relation label, or None if unrecognized."""
        return self._member_to_class.get(normalize_whitespace(relation).lower())

    def members(self) -> list[str]:
        """All member surface forms across classes."""
        return list(self._member_to_class)


def classify_spatial(relation: str, taxonomy: SpatialClassTaxonomy) -> str | None:
    """Spatial class id of a relation label, or None when out of vocabulary.

    Matching is on the lowercased, whitespace-normalized surface form; the
    ``relation`` argument must be non-empty.
    """
    if not relation.strip():
        raise ValueError("relation must be non-empty")
    return taxonomy.class_of(relation)


def parse_taxonomy_tsv(lines: Iterable[str]) -> SpatialClassTaxonomy:
    """Parse ``class_id<TAB>member_relation`` lines into a taxonomy."""
    classes: dict[str, set[str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise TaxonomyError(f"line {lineno}: expected 2 tab-separated columns, got {len(cols)}")
        class_id, member = cols[0].strip(), normalize_whitespace(cols[1]).lower()
        if not class_id or not member:
            raise TaxonomyError(f"line {lineno}: class id and member must be non-empty")
        classes.setdefault(class_id, set()).add(member)
    if not classes:
        raise TaxonomyError("taxonomy is empty")
    return SpatialClassTaxonomy({cid: frozenset(ms) for cid, ms in classes.items()})


def default_taxonomy() -> SpatialClassTaxonomy:
    """The spatial class taxonomy shipped with the package."""
    data = resources.files("kgqa.data").joinpath("spatial_classes.tsv").read_text("utf-8")
    return parse_taxonomy_tsv(data.splitlines())


def load_taxonomy(path: str) -> SpatialClassTaxonomy:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy_tsv(fh)


def load_kg(path: str) -> KnowledgeGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_kg_tsv(fh)


def save_kg(kg: KnowledgeGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(kg_to_tsv(kg))


def spatial_triples(kg: KnowledgeGraph, taxonomy: SpatialClassTaxonomy) -> list[tuple[int, str]]:
    """(triple id, class id) pairs for triples whose relation is spatial."""
    out = []
    for idx, t in enumerate(kg):
        cid = taxonomy.class_of(t.relation)
        if cid is not None:
            out.append((idx, cid))
    return out


def merge_graphs(graphs: Sequence[KnowledgeGraph]) -> KnowledgeGraph:
    """Concatenate several graphs into one, preserving order."""
    triples: list[Triple] = []
    for g in graphs:
        triples.extend(g.triples)
    return KnowledgeGraph(triples)

"""Turning triples into text: pseudo-sentences, event sentences, statements.

Three verbalization paths live here:

* ``triple_to_pseudosentence`` — the flat form used for masked pretraining
  corpora: camel-case relation labels are split into words and everything is
  lowercased, so ``(book, AtLocation, library)`` reads "book at location
  library".
* ``atomic_to_sentence`` — social/event triples keep their relation as an
  angle-bracketed special token and render blank placeholders as
  ``<blank>``.
* ``apply_template`` — question + answer option -> declarative statement,
  driven by an ordered pattern table with a deterministic fallback, so that
  a language model can score the statement instead of the raw question.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass
from importlib import resources

from .errors import TemplateError
from .text import normalize_whitespace

#: The nine recognized social/event relation labels.
ATOMIC_RELATIONS: frozenset[str] = frozenset(
    ["xIntent", "xNeed", "xAttr", "xEffect", "xReact", "xWant", "oEffect", "oReact", "oWant"]
)

# Runs of 2+ underscores are blank placeholders in event heads/tails.
_BLANK_RE = re.compile(r"_{2,}")

_WH_WORDS = ("what", "who", "whom", "whose", "where", "when", "why", "how", "which")


def split_camel_case(label: str) -> list[str]:
    """Split a CamelCase relation label into lowercase words.

    A run of consecutive capitals is treated as one word boundary:
    ``AtLocation`` -> ``["at", "location"]``, ``IsA`` -> ``["is", "a"]``,
    ``HTTPServer`` -> ``["http", "server"]``.
    """
    if not label:
        return []
    spaced = re.sub(r"(?<=[a-z0-9])(?=[A-Z])", " ", label)
    spaced = re.sub(r"(?<=[A-Z])(?=[A-Z][a-z])", " ", spaced)
    return [w.lower() for w in spaced.split()]


def triple_to_pseudosentence(head: str, relation: str, tail: str) -> str:
    """Flat lowercase rendering: head + split relation words + tail."""
    rel_words = split_camel_case(relation)
    if not rel_words:
        raise ValueError(f"relation {relation!r} has no alphabetic content")
    parts = [normalize_whitespace(head).lower(), " ".join(rel_words), normalize_whitespace(tail).lower()]
    return " ".join(p for p in parts if p)


def atomic_to_sentence(head: str, relation: str, tail: str) -> str:
    """Event rendering with the relation as a special token.

    ``(PersonX eats ___, xWant, to nap)`` becomes
    ``"PersonX eats <blank> <xWant> to nap"``. Casing of head and tail is
    preserved (``PersonX`` / ``PersonY`` stay verbatim); blank placeholders
    (runs of underscores) become ``<blank>``.
    """
    if relation not in ATOMIC_RELATIONS:
        raise ValueError(f"unknown event relation {relation!r}; expected one of {sorted(ATOMIC_RELATIONS)}")
    head = _BLANK_RE.sub("<blank>", normalize_whitespace(head))
    tail = _BLANK_RE.sub("<blank>", normalize_whitespace(tail))
    return f"{head} <{relation}> {tail}"


# ---------------------------------------------------------------------------
# Template table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemplateEntry:
    """One question pattern and the statement pattern it maps to.

    The question pattern may contain at most one ``{}`` wildcard capturing a
    span of the question. Statement-pattern slots are filled positionally:
    captured spans first, the answer option last, so a statement pattern has
    exactly one more slot than its question pattern.
    """

    question_pattern: str
    statement_pattern: str

    def __post_init__(self) -> None:
        q_slots = self.question_pattern.count("{}")
        s_slots = self.statement_pattern.count("{}")
        if q_slots > 1:
            raise TemplateError(
                f"question pattern {self.question_pattern!r} has {q_slots} wildcards; at most 1 allowed"
            )
        if s_slots != q_slots + 1:
            raise TemplateError(
                f"statement pattern {self.statement_pattern!r} must have exactly "
                f"{q_slots + 1} slot(s) (captured spans plus one option slot), got {s_slots}"
            )

    def compiled(self) -> re.Pattern[str]:
        parts = self.question_pattern.split("{}")
        body = r"(.+?)".join(re.escape(normalize_whitespace(p)) for p in parts)
        return re.compile(rf"^{body}$", re.IGNORECASE)


@dataclass(frozen=True)
class TemplateTable:
    """Ordered question->statement patterns plus the fallback switch.

    Matching walks the entries in order and the first hit wins. When nothing
    matches and ``fallback`` is true, the statement is built by concatenating
    context, the question stripped of a leading wh-word and trailing ``?``,
    and the option. With ``fallback`` false an unmatched question raises
    :class:`TemplateError`.
    """

    entries: tuple[TemplateEntry, ...]
    fallback: bool = True

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], fallback: bool = True) -> "TemplateTable":
        return cls(tuple(TemplateEntry(q, s) for q, s in pairs), fallback)


def parse_template_tsv(lines: Iterable[str], fallback: bool = True) -> TemplateTable:
    """Parse ``question_pattern<TAB>statement_pattern`` rows into a table."""
    entries: list[TemplateEntry] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise TemplateError(f"line {lineno}: expected 2 tab-separated columns, got {len(cols)}")
        try:
            entries.append(TemplateEntry(cols[0], cols[1]))
        except TemplateError as exc:
            raise TemplateError(f"line {lineno}: {exc}") from None
    return TemplateTable(tuple(entries), fallback)


def default_templates() -> TemplateTable:
    """The template table shipped with the package."""
    data = resources.files("kgqa.data").joinpath("templates.tsv").read_text("utf-8")
    return parse_template_tsv(data.splitlines())


def load_templates(path: str, fallback: bool = True) -> TemplateTable:
    with open(path, encoding="utf-8") as fh:
        return parse_template_tsv(fh, fallback)


def _strip_leading_wh(question: str) -> str:
    words = question.split()
    if words and words[0].lower() in _WH_WORDS:
        words = words[1:]
    return " ".join(words)


def apply_template(context: str, question: str, option: str, table: TemplateTable) -> str:
    """Instantiate the first matching template, or fall back to concatenation.

    On a match, statement-pattern slots receive the captured question spans in
    order and the option last; the context is prepended verbatim (statement
    patterns carry their own leading separator, which is trimmed when the
    context is empty). The result is whitespace-normalized and never empty for
    a non-empty option.
    """
    if not option.strip():
        raise ValueError("option must be non-empty")
    context = normalize_whitespace(context)
    question_n = normalize_whitespace(question)
    for entry in table.entries:
        m = entry.compiled().match(question_n)
        if m is None:
            continue
        fills = [*m.groups(), option]
        parts = entry.statement_pattern.split("{}")
        body = "".join(p + f for p, f in zip(parts, fills)) + parts[-1]
        statement = (context + body) if context else body.lstrip(" ,;")
        return normalize_whitespace(statement)
    if not table.fallback:
        raise TemplateError(f"no template matches question {question_n!r} and fallback is disabled")
    stripped = _strip_leading_wh(question_n).rstrip("?").rstrip()
    return normalize_whitespace(" ".join(p for p in (context, stripped, option) if p))


# ---------------------------------------------------------------------------
# Question forms used by synthesis
# ---------------------------------------------------------------------------

#: Relation -> question pattern used when synthesizing items from triples.
#: Each pattern here also appears as a question pattern in the shipped
#: template table, so synthesized questions round-trip through
#: :func:`apply_template` back into declarative statements.
QUESTION_FORMS: dict[str, str] = {
    "AtLocation": "where would you find {}?",
    "UsedFor": "what is {} used for?",
    "CapableOf": "what is {} capable of?",
    "Causes": "what does {} cause?",
    "HasSubevent": "what happens during {}?",
    "HasPrerequisite": "what do you need before {}?",
    "CausesDesire": "what does {} make you want?",
    "Desires": "what does {} want?",
    "Antonym": "what is the opposite of {}?",
    "MadeOf": "what is {} made of?",
    "IsA": "what kind of thing is {}?",
    "PartOf": "what is {} part of?",
    "HasA": "what does {} have?",
    "HasProperty": "what is a property of {}?",
    "ReceivesAction": "what can be done to {}?",
    "RelatedTo": "what is related to {}?",
}


def question_for_triple(relation: str, head: str) -> str | None:
    """Question text asking for the tail of a (head, relation, ?) triple."""
    pattern = QUESTION_FORMS.get(relation)
    if pattern is None:
        return None
    return pattern.replace("{}", normalize_whitespace(head))

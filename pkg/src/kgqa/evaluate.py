"""Zero-shot and trained-scorer evaluation over multiple-choice items.

The harness runs a model over a benchmark once per seed, reports accuracy
with a 95% confidence half-width across seeds (Student-t with k-1 degrees of
freedom; zero for a single seed), and can break accuracy down by question
type using the relation of the knowledge-graph triple connecting each
question to its gold answer. Per-item model failures never abort a run; they
count as incorrect and are tallied.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from scipy import stats

from .elicit import classify_question_type
from .errors import BenchmarkError
from .kg import KnowledgeGraph
from .scoring import score_item
from .synth import QAItem, parse_items_jsonl
from .text import normalize_phrase
from .training import LogLinearScorer, _item_statements
from .verbalize import TemplateTable, default_templates

logger = logging.getLogger(__name__)

#: Type label for items that no triple connects (or with no known concept).
OTHER_TYPE = "other"


@dataclass
class EvalReport:
    """Everything one benchmark run produced.

    ``accuracy`` and ``per_type`` reflect the first seed's predictions;
    ``seed_accuracies`` holds one accuracy per seed, and ``mean_accuracy`` /
    ``ci_half_width`` summarize them.
    """

    task: str
    n_items: int
    accuracy: float
    seed_accuracies: list[tuple[int, float]]
    mean_accuracy: float
    ci_half_width: float
    per_type: dict[str, tuple[int, float]] = field(default_factory=dict)
    errors: int = 0
    model_name: str = ""
    ci_method: str = "t"


def load_benchmark_jsonl(path: str) -> list[QAItem]:
    """Read a benchmark (JSONL, one item per line), in file order."""
    with open(path, encoding="utf-8") as fh:
        items = parse_items_jsonl(fh)
    if not items:
        raise BenchmarkError(f"benchmark {path!r} contains no items")
    return items


def majority_baseline(items: Sequence[QAItem]) -> float:
    """Accuracy of always answering the most frequent gold index.

    Ties between equally frequent indexes break toward the lowest index.
    """
    if not items:
        raise ValueError("cannot compute a baseline over zero items")
    counts = Counter(item.answer_index for item in items)
    best = min(counts, key=lambda idx: (-counts[idx], idx))
    return counts[best] / len(items)


def confidence_half_width(accuracies: Sequence[float], method: str = "t") -> float:
    """95% half-width over per-seed accuracies; 0 for a single seed.

    ``method='t'`` uses the Student-t quantile with k-1 degrees of freedom;
    ``method='normal'`` uses the z quantile. Both use the sample standard
    deviation over sqrt(k).
    """
    k = len(accuracies)
    if k == 0:
        raise ValueError("need at least one accuracy")
    if k == 1:
        return 0.0
    mean = sum(accuracies) / k
    var = sum((a - mean) ** 2 for a in accuracies) / (k - 1)
    sd = math.sqrt(var)
    if method == "t":
        q = float(stats.t.ppf(0.975, k - 1))
    elif method == "normal":
        q = float(stats.norm.ppf(0.975))
    else:
        raise ValueError(f"unknown CI method {method!r}; expected 't' or 'normal'")
    return q * sd / math.sqrt(k)


def _predict_one(model, item: QAItem, templates: TemplateTable, mode: str, mask_stop_words: bool) -> int:
    if isinstance(model, LogLinearScorer):
        return model.predict(_item_statements(item, templates))
    _, predicted = score_item(model, item, templates, mode, mask_stop_words)
    return predicted


def run_predictions(
    model,
    items: Sequence[QAItem],
    templates: TemplateTable,
    mode: str = "ar",
    mask_stop_words: bool = False,
) -> tuple[list[int | None], int]:
    """Predictions for every item; failures yield ``None`` and are counted."""
    predictions: list[int | None] = []
    errors = 0
    for item in items:
        try:
            predictions.append(_predict_one(model, item, templates, mode, mask_stop_words))
        except Exception as exc:
            logger.warning("scoring failed for item %s: %s", item.id, exc)
            predictions.append(None)
            errors += 1
    return predictions, errors


def accuracy_of(items: Sequence[QAItem], predictions: Sequence[int | None]) -> float:
    correct = sum(1 for item, p in zip(items, predictions) if p == item.answer_index)
    return correct / len(items)


def evaluate(
    model,
    items: Sequence[QAItem],
    templates: TemplateTable | None = None,
    mode: str = "ar",
    seeds: Sequence[int] = (0,),
    kg: KnowledgeGraph | None = None,
    mask_stop_words: bool = False,
    task: str = "task",
    ci_method: str = "t",
    model_name: str = "",
) -> EvalReport:
    """Run a model over a benchmark once per seed and aggregate.

    ``model`` is a provider (anything with ``score_text``), a trained
    :class:`LogLinearScorer`, or a callable ``seed -> model`` that rebuilds
    any stochastic state per seed. Per-item failures count as incorrect.
    When ``kg`` is given, the first seed's predictions are broken down by
    question type.
    """
    if not items:
        raise ValueError("cannot evaluate over zero items")
    if not seeds:
        raise ValueError("need at least one seed")
    templates = templates if templates is not None else default_templates()

    seed_accuracies: list[tuple[int, float]] = []
    first_predictions: list[int | None] | None = None
    total_errors = 0
    for seed in seeds:
        seed_model = model(seed) if callable(model) and not hasattr(model, "score_text") else model
        predictions, errors = run_predictions(seed_model, items, templates, mode, mask_stop_words)
        total_errors += errors
        seed_accuracies.append((seed, accuracy_of(items, predictions)))
        if first_predictions is None:
            first_predictions = predictions

    assert first_predictions is not None
    accuracies = [a for _, a in seed_accuracies]
    per_type = (
        per_type_accuracy(items, first_predictions, kg) if kg is not None else {}
    )
    return EvalReport(
        task=task,
        n_items=len(items),
        accuracy=accuracies[0],
        seed_accuracies=seed_accuracies,
        mean_accuracy=sum(accuracies) / len(accuracies),
        ci_half_width=confidence_half_width(accuracies, ci_method),
        per_type=per_type,
        errors=total_errors,
        model_name=model_name,
        ci_method=ci_method,
    )


def per_type_accuracy(
    items: Sequence[QAItem],
    predictions: Sequence[int | None],
    kg: KnowledgeGraph,
) -> dict[str, tuple[int, float]]:
    """Accuracy per question type: ``{type: (count, accuracy)}``.

    An item's type is the relation of the strongest triple connecting its
    question concept (``meta["question_concept"]``, falling back to
    ``meta["question_type"]`` when synthesis recorded one) to its gold
    option; unconnected or conceptless items group under ``"other"``. The
    counts partition the items, so count-weighted accuracies recombine to the
    overall accuracy.
    """
    if len(items) != len(predictions):
        raise ValueError(f"{len(items)} items but {len(predictions)} predictions")
    counts: Counter[str] = Counter()
    correct: Counter[str] = Counter()
    for item, pred in zip(items, predictions):
        qtype: str | None = None
        concept = item.meta.get("question_concept")
        if concept:
            qtype = classify_question_type(kg, concept, normalize_phrase(item.answer))
        if qtype is None and item.meta.get("question_type"):
            qtype = str(item.meta["question_type"])
        label = qtype if qtype else OTHER_TYPE
        counts[label] += 1
        if pred == item.answer_index:
            correct[label] += 1
    return {label: (counts[label], correct[label] / counts[label]) for label in sorted(counts)}


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def emit_report(report: EvalReport, fmt: str = "tsv") -> str:
    """Render one report as TSV or Markdown (deterministic layouts)."""
    if fmt == "tsv":
        lines = [
            "task\tn_items\tmean_accuracy\tci_half_width\tseeds\terrors",
            "\t".join(
                [
                    report.task,
                    str(report.n_items),
                    _fmt(report.mean_accuracy),
                    _fmt(report.ci_half_width),
                    ",".join(str(s) for s, _ in report.seed_accuracies),
                    str(report.errors),
                ]
            ),
        ]
        if report.per_type:
            lines.append("type\tcount\taccuracy")
            for label, (count, acc) in report.per_type.items():
                lines.append(f"{label}\t{count}\t{_fmt(acc)}")
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        name = report.model_name or "model"
        lines = [
            f"| {name} | {report.task} |",
            "| --- | --- |",
            f"| accuracy | {_fmt(report.mean_accuracy)} ± {_fmt(report.ci_half_width)} |",
            f"| items | {report.n_items} |",
            f"| errors | {report.errors} |",
        ]
        if report.per_type:
            lines.append("")
            lines.append("| type | count | accuracy |")
            lines.append("| --- | --- | --- |")
            for label, (count, acc) in report.per_type.items():
                lines.append(f"| {label} | {count} | {_fmt(acc)} |")
        lines.append("")
        lines.append(_ci_footer(report.ci_method, len(report.seed_accuracies)))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; expected 'tsv' or 'markdown'")


def emit_report_grid(reports: Sequence[EvalReport], fmt: str = "markdown") -> str:
    """Model-by-task grid over several reports (cells: mean ± half-width)."""
    if not reports:
        raise ValueError("need at least one report")
    tasks = list(dict.fromkeys(r.task for r in reports))
    models = list(dict.fromkeys(r.model_name or "model" for r in reports))
    cell: dict[tuple[str, str], str] = {}
    for r in reports:
        cell[(r.model_name or "model", r.task)] = f"{_fmt(r.mean_accuracy)} ± {_fmt(r.ci_half_width)}"
    if fmt == "tsv":
        lines = ["model\t" + "\t".join(tasks)]
        for m in models:
            lines.append(m + "\t" + "\t".join(cell.get((m, t), "-") for t in tasks))
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = [
            "| model | " + " | ".join(tasks) + " |",
            "| --- |" + " --- |" * len(tasks),
        ]
        for m in models:
            lines.append("| " + m + " | " + " | ".join(cell.get((m, t), "-") for t in tasks) + " |")
        lines.append("")
        k = max(len(r.seed_accuracies) for r in reports)
        lines.append(_ci_footer(reports[0].ci_method, k))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; expected 'tsv' or 'markdown'")


def _ci_footer(ci_method: str, k: int) -> str:
    if ci_method == "t":
        return f"_95% CI half-width: Student-t with k−1 degrees of freedom over k={k} seed(s)._"
    return f"_95% CI half-width: normal approximation over k={k} seed(s)._"

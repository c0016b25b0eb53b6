"""Command-line driver for the whole pipeline.

One binary, one subcommand per stage::

    kgqa ingest          parse/filter a knowledge-graph TSV
    kgqa synth           synthesize multiple-choice items from a graph
    kgqa spatial-synth   masked-relation spatial questions from a graph
    kgqa mask            build a masked pretraining corpus
    kgqa eval            run a provider or checkpoint over a benchmark
    kgqa train-mr        fit the marginal-ranking scorer on items
    kgqa elicit          list triples connecting questions to options
    kgqa spatial-subset  extract a benchmark's spatially phrased items

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
Providers are named ``builtin:<corpus.txt>`` (n-gram over one sentence per
line), ``uniform:<vocab_size>``, or ``external:<command>`` (wire-protocol
subprocess; timeout via ``KGQA_PROVIDER_TIMEOUT_MS``).
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence

from .elicit import (
    ConceptMatchConfig,
    default_spatial_lexicon,
    extract_spatial_subset,
    find_connecting_triples,
    load_lexicon,
    spatial_subset_summary,
)
from .errors import DataError, KgqaError, ProviderError
from .evaluate import (
    emit_report,
    evaluate,
    load_benchmark_jsonl,
    majority_baseline,
)
from .kg import default_taxonomy, filter_by_frequency, load_kg, load_taxonomy, save_kg
from .masking import MaskStrategy, atomic_tail_boundary, mask_corpus, write_masked_tsv
from .scoring import NgramProvider, UniformProvider, score_item, statements_for_item
from .synth import synthesize_qa, synthesize_spatial_qa, write_items_jsonl
from .training import (
    load_checkpoint,
    save_checkpoint,
    train_scorer,
    training_loss,
)
from .verbalize import default_templates, load_templates
from .wire import ExternalProvider

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 (not 2) on usage errors."""

    def error(self, message: str):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _rate(value: str) -> float:
    try:
        r = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number") from None
    if not (0.0 < r <= 1.0):
        raise argparse.ArgumentTypeError(f"rate must be in (0, 1], got {r}")
    return r


def _seed_list(value: str) -> list[int]:
    try:
        seeds = [int(s) for s in value.split(",") if s.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a comma-separated integer list") from None
    if not seeds:
        raise argparse.ArgumentTypeError("need at least one seed")
    return seeds


def _make_provider(spec: str, order: int, alpha: float):
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ProviderError(f"provider spec {spec!r} must look like kind:argument")
    if kind == "uniform":
        try:
            return UniformProvider(int(arg))
        except ValueError as exc:
            raise ProviderError(f"bad uniform provider spec {spec!r}: {exc}") from None
    if kind == "builtin":
        try:
            with open(arg, encoding="utf-8") as fh:
                sentences = [ln.strip() for ln in fh if ln.strip()]
        except OSError as exc:
            raise DataError(f"cannot read corpus {arg!r}: {exc}") from None
        if not sentences:
            raise DataError(f"corpus {arg!r} is empty")
        return NgramProvider(sentences, order=order, alpha=alpha)
    if kind == "external":
        return ExternalProvider(arg)
    raise ProviderError(f"unknown provider kind {kind!r}; expected builtin, uniform, or external")


def _load_templates_arg(path: str | None):
    return load_templates(path) if path else default_templates()


def _load_taxonomy_arg(path: str | None):
    return load_taxonomy(path) if path else default_taxonomy()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    kg = load_kg(args.kg)
    print(f"triples\t{len(kg)}")
    if args.min_count is not None:
        kg = filter_by_frequency(kg, args.min_count)
        print(f"kept\t{len(kg)}")
    for rel in kg.relations():
        print(f"relation\t{rel}\t{len(kg.ids_for_relation(rel))}")
    if args.out:
        save_kg(kg, args.out)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    kg = load_kg(args.kg)
    templates = _load_templates_arg(args.templates)
    items = synthesize_qa(kg, templates, num_options=args.options, seed=args.seed, workers=args.workers)
    write_items_jsonl(items, args.out)
    print(f"items\t{len(items)}")
    return EXIT_OK


def _cmd_spatial_synth(args: argparse.Namespace) -> int:
    kg = load_kg(args.kg)
    taxonomy = _load_taxonomy_arg(args.taxonomy)
    items = synthesize_spatial_qa(kg, taxonomy, num_options=args.options, seed=args.seed)
    write_items_jsonl(items, args.out)
    print(f"items\t{len(items)}")
    return EXIT_OK


def _cmd_mask(args: argparse.Namespace) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            sentences = [ln.rstrip("\n") for ln in fh if ln.strip()]
    except OSError as exc:
        raise DataError(f"cannot read {args.input!r}: {exc}") from None
    strategy = MaskStrategy.TAIL_ONLY if args.strategy == "tail" else MaskStrategy.ALL
    boundaries = None
    if strategy is MaskStrategy.TAIL_ONLY:
        try:
            boundaries = [atomic_tail_boundary(s.split()) for s in sentences]
        except ValueError as exc:
            raise DataError(f"cannot derive tail boundaries: {exc}") from None
    records = mask_corpus(sentences, rate=args.rate, seed=args.seed, strategy=strategy, boundaries=boundaries)
    write_masked_tsv(records, args.out)
    masked = sum(len(r.mask_positions) for r in records)
    total = sum(len(r.original_tokens) for r in records)
    print(f"sentences\t{len(records)}")
    print(f"masked_fraction\t{masked / total if total else 0.0:.4f}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    items = load_benchmark_jsonl(args.task)
    templates = _load_templates_arg(args.templates)
    kg = load_kg(args.kg) if args.kg else None
    if args.checkpoint:
        model, _meta = load_checkpoint(args.checkpoint)
        close = None
    else:
        model = _make_provider(args.provider, args.ngram_order, args.alpha)
        close = getattr(model, "close", None)
    try:
        report = evaluate(
            model,
            items,
            templates=templates,
            mode=args.mode,
            seeds=args.seeds,
            kg=kg,
            mask_stop_words=args.mask_stop_words,
            task=args.task_name or args.task,
            ci_method=args.ci,
            model_name=args.model_name,
        )
        if args.predictions:
            _dump_predictions(model, items, templates, args)
    finally:
        if close is not None:
            close()
    out = emit_report(report, args.report)
    sys.stdout.write(out)
    print(f"majority_baseline\t{majority_baseline(items):.4f}")
    return EXIT_OK


def _dump_predictions(model, items, templates, args) -> None:
    """Write per-item statements, scores, and the chosen index as JSONL."""
    from .training import LogLinearScorer

    with open(args.predictions, "w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            statements = statements_for_item(item, templates)
            record: dict = {"id": item.id, "statements": statements, "answer_index": item.answer_index}
            try:
                if isinstance(model, LogLinearScorer):
                    record["scores"] = [-model.plausibility(s) for s in statements]
                    record["predicted"] = model.predict(statements)
                else:
                    scores, predicted = score_item(model, item, templates, args.mode, args.mask_stop_words)
                    record["scores"] = scores
                    record["predicted"] = predicted
            except KgqaError as exc:
                record["error"] = str(exc)
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def _cmd_train_mr(args: argparse.Namespace) -> int:
    items = load_benchmark_jsonl(args.task)
    templates = _load_templates_arg(args.templates)
    scorer = train_scorer(
        items,
        templates,
        epochs=args.epochs,
        learning_rate=args.lr,
        eta=args.eta,
        seed=args.seed,
    )
    loss = training_loss(scorer, items, templates, eta=args.eta)
    correct = 0
    for item in items:
        if scorer.predict(statements_for_item(item, templates)) == item.answer_index:
            correct += 1
    print(f"train_accuracy\t{correct / len(items):.4f}")
    print(f"train_mr_loss\t{loss:.6g}")
    if args.out:
        save_checkpoint(scorer, args.out, seed=args.seed, eta=args.eta, learning_rate=args.lr, epochs=args.epochs)
    return EXIT_OK


def _cmd_elicit(args: argparse.Namespace) -> int:
    kg = load_kg(args.kg)
    items = load_benchmark_jsonl(args.task)
    config = ConceptMatchConfig(max_phrase_len=args.max_phrase_len, relaxed=not args.strict)
    for item in items:
        connections = []
        for opt_idx, option in enumerate(item.options):
            triples = find_connecting_triples(kg, item.context + " " + item.question, option, config)
            connections.append(
                {"option_index": opt_idx, "triples": [t.to_dict() for t in triples]}
            )
        print(json.dumps({"id": item.id, "connections": connections}, sort_keys=True, ensure_ascii=False))
    return EXIT_OK


def _cmd_spatial_subset(args: argparse.Namespace) -> int:
    items = load_benchmark_jsonl(args.task)
    taxonomy = _load_taxonomy_arg(args.taxonomy)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_spatial_lexicon()
    subset = extract_spatial_subset(items, taxonomy, lexicon, include_options=not args.questions_only)
    if args.out:
        write_items_jsonl(subset, args.out)
    print(spatial_subset_summary(args.task_name or args.task, len(items), len(subset)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="kgqa", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and optionally frequency-filter a knowledge-graph TSV")
    p.add_argument("--kg", required=True, help="five-column triple TSV")
    p.add_argument("--min-count", type=_positive_int, default=None, help="keep triples occurring at least this often")
    p.add_argument("--out", default=None, help="write the resulting graph as TSV")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="synthesize multiple-choice items from a graph")
    p.add_argument("--kg", required=True)
    p.add_argument("--templates", default=None, help="template TSV (default: shipped table)")
    p.add_argument("--options", type=_positive_int, default=3, help="options per item")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True, help="output items JSONL")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("spatial-synth", help="masked-relation spatial questions from a graph")
    p.add_argument("--kg", required=True)
    p.add_argument("--taxonomy", default=None, help="taxonomy TSV (default: shipped)")
    p.add_argument("--options", type=_positive_int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_spatial_synth)

    p = sub.add_parser("mask", help="build a masked pretraining corpus from sentences")
    p.add_argument("--input", required=True, help="text file, one sentence per line")
    p.add_argument("--rate", type=_rate, default=0.15)
    p.add_argument("--strategy", choices=["all", "tail"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output TSV")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("eval", help="evaluate a provider or checkpoint over a benchmark")
    p.add_argument("--task", required=True, help="benchmark JSONL")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--provider", help="builtin:<corpus>, uniform:<V>, or external:<command>")
    group.add_argument("--checkpoint", help="trained scorer checkpoint")
    p.add_argument("--mode", choices=["ar", "mlm"], default="ar")
    p.add_argument("--seeds", type=_seed_list, default=[0])
    p.add_argument("--templates", default=None)
    p.add_argument("--kg", default=None, help="graph for per-type breakdowns")
    p.add_argument("--mask-stop-words", action="store_true")
    p.add_argument("--report", choices=["tsv", "markdown"], default="tsv")
    p.add_argument("--ci", choices=["t", "normal"], default="t")
    p.add_argument("--ngram-order", type=_positive_int, default=3)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--predictions", default=None, help="dump per-item statements/scores JSONL here")
    p.add_argument("--task-name", default=None)
    p.add_argument("--model-name", default="")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("train-mr", help="fit the marginal-ranking scorer")
    p.add_argument("--task", required=True, help="training items JSONL")
    p.add_argument("--templates", default=None)
    p.add_argument("--epochs", type=_positive_int, default=20)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write checkpoint here")
    p.set_defaults(func=_cmd_train_mr)

    p = sub.add_parser("elicit", help="triples connecting each item's question to its options")
    p.add_argument("--kg", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--max-phrase-len", type=_positive_int, default=4)
    p.add_argument("--strict", action="store_true", help="exact phrase matching only")
    p.set_defaults(func=_cmd_elicit)

    p = sub.add_parser("spatial-subset", help="extract the spatially phrased items of a benchmark")
    p.add_argument("--task", required=True)
    p.add_argument("--taxonomy", default=None)
    p.add_argument("--lexicon", default=None, help="pattern file (default: shipped lexicon)")
    p.add_argument("--questions-only", action="store_true", help="scan questions but not options")
    p.add_argument("--out", default=None, help="write the subset JSONL here")
    p.add_argument("--task-name", default=None)
    p.set_defaults(func=_cmd_spatial_subset)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProviderError as exc:
        print(f"kgqa: provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except DataError as exc:
        print(f"kgqa: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"kgqa: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KgqaError as exc:
        print(f"kgqa: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"kgqa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

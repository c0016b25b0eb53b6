"""Knowledge-graph-driven QA synthesis, masking, scoring, and evaluation.

The pipeline, end to end: ingest a triple TSV into a
:class:`~kgqa.kg.KnowledgeGraph`; verbalize triples into pseudo-sentences or
event sentences; synthesize multiple-choice items with sampled distractors;
build masked pretraining corpora; score candidate answers with a
token-probability provider (built-in n-gram, uniform, or an external
subprocess speaking the wire protocol); and evaluate with seeded reruns,
confidence intervals, and per-type breakdowns. A marginal-ranking trainer
fits a hashed log-linear scorer on the same items.
"""

from .elicit import (
    ConceptMatchConfig,
    classify_question_type,
    default_spatial_lexicon,
    extract_concepts,
    extract_spatial_subset,
    find_connecting_triples,
)
from .errors import (
    BenchmarkError,
    DataError,
    KGParseError,
    KgqaError,
    ProviderError,
    ScoringError,
    TaxonomyError,
    TemplateError,
)
from .evaluate import (
    OTHER_TYPE,
    EvalReport,
    accuracy_of,
    confidence_half_width,
    emit_report,
    emit_report_grid,
    evaluate,
    load_benchmark_jsonl,
    majority_baseline,
    per_type_accuracy,
    run_predictions,
)
from .kg import (
    KnowledgeGraph,
    Source,
    SpatialClassTaxonomy,
    Triple,
    classify_spatial,
    default_taxonomy,
    filter_by_frequency,
    kg_to_tsv,
    load_kg,
    load_taxonomy,
    parse_kg_tsv,
    parse_taxonomy_tsv,
    save_kg,
)
from .masking import (
    MASK_TOKEN,
    MaskedCorpusRecord,
    MaskStrategy,
    atomic_tail_boundary,
    mask_corpus,
    reconstruct,
    records_to_tsv,
    write_masked_tsv,
)
from .scoring import (
    NgramProvider,
    ScoredSequence,
    TokenProbabilityProvider,
    UniformProvider,
    non_stop_indices,
    score_autoregressive,
    score_item,
    score_masked,
    select_answer,
    statements_for_item,
)
from .synth import (
    QAItem,
    items_to_jsonl,
    make_spatial_masked_question,
    mask_span,
    parse_items_jsonl,
    synthesize_qa,
    synthesize_spatial_qa,
    write_items_jsonl,
)
from .text import STOP_WORDS, content_tokens, normalize_phrase, tokenize
from .training import (
    LogLinearScorer,
    load_checkpoint,
    mr_loss,
    mr_loss_grad,
    save_checkpoint,
    train_mlm_style,
    train_scorer,
    training_loss,
)
from .verbalize import (
    ATOMIC_RELATIONS,
    QUESTION_FORMS,
    TemplateTable,
    apply_template,
    atomic_to_sentence,
    default_templates,
    load_templates,
    question_for_triple,
    split_camel_case,
    triple_to_pseudosentence,
)
from .wire import (
    DEFAULT_TIMEOUT_MS,
    TIMEOUT_ENV_VAR,
    ExternalProvider,
    provider_timeout_seconds,
)

__version__ = "0.1.0"

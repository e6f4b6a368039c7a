"""Corpus data model, JSONL I/O, gold-label tensors, synthetic generation."""

from eventsent.corpus.data import (
    POLARITIES,
    ROLES,
    Corpus,
    CorpusError,
    Document,
    Event,
    ParseError,
    Span,
    ValidationError,
    detokenize,
    with_events,
)
from eventsent.corpus.io import (
    corpus_to_jsonl,
    document_from_obj,
    document_to_obj,
    json_dumps,
    load_jsonl,
    parse_line,
    save_jsonl,
    truncate_document,
)
from eventsent.corpus.labels import (
    EventLabels,
    LabelTensors,
    N_BOUNDARY_TOKENS,
    build_label_tensors,
    gold_role_spans,
    padded_length,
    polarity_id,
    real_token_mask,
)
from eventsent.corpus.splits import SplitConfigError, split_corpus, split_sizes
from eventsent.corpus.stats import StatsReport, corpus_stats
from eventsent.corpus.synthetic import (
    SynthConfig,
    SynthConfigError,
    generate_synthetic,
    small_config,
)

__all__ = [
    "POLARITIES",
    "ROLES",
    "Corpus",
    "CorpusError",
    "Document",
    "Event",
    "EventLabels",
    "LabelTensors",
    "N_BOUNDARY_TOKENS",
    "ParseError",
    "Span",
    "SplitConfigError",
    "StatsReport",
    "SynthConfig",
    "SynthConfigError",
    "ValidationError",
    "build_label_tensors",
    "corpus_stats",
    "corpus_to_jsonl",
    "detokenize",
    "document_from_obj",
    "document_to_obj",
    "generate_synthetic",
    "gold_role_spans",
    "json_dumps",
    "load_jsonl",
    "padded_length",
    "parse_line",
    "polarity_id",
    "real_token_mask",
    "save_jsonl",
    "small_config",
    "split_corpus",
    "split_sizes",
    "truncate_document",
    "with_events",
]

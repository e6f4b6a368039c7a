"""Structured event-level sentiment analysis.

Extracts event triggers and their subject/object/time/location arguments from
documents and classifies a positive/negative/neutral polarity per event, with
joint training of all three stages over a shared contextual encoder.
"""

__version__ = "0.1.0"

from eventsent.corpus import (
    Corpus,
    Document,
    Event,
    Span,
    build_label_tensors,
    corpus_stats,
    generate_synthetic,
    load_jsonl,
    save_jsonl,
    split_corpus,
)
from eventsent.evaluation import (
    evaluate_end2end,
    gold_argument_sentiment,
    krippendorff_alpha,
)
from eventsent.model import DecodeConfig, JointModel, PipelineModel, load_model
from eventsent.pipeline import predict_file
from eventsent.training import TrainConfig, gradient_check, train

__all__ = [
    "Corpus",
    "DecodeConfig",
    "Document",
    "Event",
    "JointModel",
    "PipelineModel",
    "Span",
    "TrainConfig",
    "build_label_tensors",
    "corpus_stats",
    "evaluate_end2end",
    "generate_synthetic",
    "gold_argument_sentiment",
    "gradient_check",
    "krippendorff_alpha",
    "load_jsonl",
    "load_model",
    "predict_file",
    "save_jsonl",
    "split_corpus",
    "train",
]

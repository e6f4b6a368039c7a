"""End-to-end inference over JSONL files.

``predict_file`` reads documents one per line, runs trigger -> argument ->
polarity extraction, and writes one output line per input line. Lines that
fail schema validation produce an error record in the output (keeping the
one-to-one correspondence) and are counted in the summary.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from eventsent.corpus.data import CorpusError, Document
from eventsent.corpus.io import DEFAULT_MAX_SEQ_LEN, document_to_obj, json_dumps, parse_line
from eventsent.model import DecodeConfig, JointModel, PipelineModel, load_model

__all__ = [
    "DecodeConfig",
    "JointModel",
    "PipelineModel",
    "load_model",
    "PredictSummary",
    "extract_events",
    "predict_corpus",
    "predict_file",
]


def extract_events(model, doc: Document, decode_cfg: DecodeConfig | None = None,
                   preprocessor=None):
    """Decode the events of a single document with a trained model."""
    preprocessor = preprocessor or model.make_preprocessor()
    prepared = preprocessor.prepare(doc, with_labels=False)
    return model.extract_events(prepared, decode_cfg)


@dataclass
class PredictSummary:
    n_documents: int = 0
    n_events: int = 0
    n_errors: int = 0
    errors: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "n_events": self.n_events,
            "n_errors": self.n_errors,
            "errors": list(self.errors),
        }


def predict_corpus(model, corpus, decode_cfg: DecodeConfig | None = None) -> list:
    """Predicted event lists for each document, in order."""
    preprocessor = model.make_preprocessor()
    return [
        model.extract_events(preprocessor.prepare(doc, with_labels=False), decode_cfg)
        for doc in corpus
    ]


def predict_file(
    model,
    input_path: str | os.PathLike,
    output_path: str | os.PathLike,
    decode_cfg: DecodeConfig | None = None,
    max_seq_len: int | None = None,
) -> PredictSummary:
    """Annotate a JSONL file with predicted events, line for line.

    Input lines may carry gold `events`; they are ignored. Every output
    document records whether it was truncated to the model's sequence limit.
    """
    if max_seq_len is None:
        max_seq_len = getattr(model.config, "max_seq_len", DEFAULT_MAX_SEQ_LEN)
    preprocessor = model.make_preprocessor()
    summary = PredictSummary()
    with open(input_path, "r", encoding="utf-8") as src, open(
        output_path, "w", encoding="utf-8"
    ) as dst:
        for line_no, line in enumerate(src, start=1):
            if not line.strip():
                continue
            try:
                doc = parse_line(line, line_no, max_seq_len)
            except CorpusError as exc:
                summary.n_errors += 1
                summary.errors.append({"line": line_no, "error": str(exc)})
                dst.write(json_dumps({"line": line_no, "error": str(exc)}) + "\n")
                continue
            doc.events = []
            prepared = preprocessor.prepare(doc, with_labels=False)
            events = model.extract_events(prepared, decode_cfg)
            doc.events = events
            obj = document_to_obj(doc)
            obj["truncated"] = doc.truncated
            dst.write(json_dumps(obj) + "\n")
            summary.n_documents += 1
            summary.n_events += len(events)
    return summary

"""Import adapter for externally formatted event-sentiment datasets.

The canonical JSONL schema is this package's own; released datasets come in
unknown shapes, so the adapter is driven by an explicit field mapping instead
of guessing. Unmapped fields are preserved under the document's ``extra`` key.
If a role carries several spans, the first is kept and a warning is logged.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

from eventsent.corpus.data import Corpus, Document, Event, ROLES, Span, ValidationError
from eventsent.corpus.io import truncate_document

logger = logging.getLogger(__name__)


@dataclass
class FieldMapping:
    """How to read one foreign record into the canonical document shape.

    Span fields may be given as token-index pairs under ``start``/``end`` keys
    named here. ``polarity_labels`` maps foreign polarity values onto P/N/O.
    """

    doc_id: str = "doc_id"
    text: str = "text"
    tokens: str = "tokens"
    sentence_boundaries: str = "sentence_boundaries"
    events: str = "events"
    trigger: str = "trigger"
    roles: dict[str, str] = field(
        default_factory=lambda: {role: role for role in ROLES}
    )
    span_start: str = "start"
    span_end: str = "end"
    polarity: str = "polarity"
    polarity_labels: dict[str, str] = field(
        default_factory=lambda: {"P": "P", "N": "N", "O": "O"}
    )
    detok: str = "space"

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "FieldMapping":
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
        return cls(**raw)


def _read_span(raw, mapping: FieldMapping, doc: Document) -> Span | None:
    if raw is None:
        return None
    if isinstance(raw, list):
        if not raw:
            return None
        if len(raw) > 1:
            logger.warning("doc %s: role has %d spans, keeping the first", doc.doc_id, len(raw))
        raw = raw[0]
    start = raw[mapping.span_start]
    end = raw[mapping.span_end]
    return doc.make_span(int(start), int(end))


def import_record(raw: dict, mapping: FieldMapping, max_seq_len: int = 512) -> Document:
    known = {
        mapping.doc_id, mapping.text, mapping.tokens,
        mapping.sentence_boundaries, mapping.events,
    }
    doc = Document(
        doc_id=str(raw[mapping.doc_id]),
        text=raw[mapping.text],
        tokens=list(raw[mapping.tokens]),
        sentence_boundaries=list(raw.get(mapping.sentence_boundaries, [])),
        detok=mapping.detok,
        extra={k: v for k, v in raw.items() if k not in known},
    )
    for raw_event in raw.get(mapping.events, []):
        trigger = _read_span(raw_event.get(mapping.trigger), mapping, doc)
        if trigger is None:
            raise ValidationError("event has no trigger", doc_id=doc.doc_id)
        foreign_label = raw_event.get(mapping.polarity)
        if foreign_label not in mapping.polarity_labels:
            raise ValidationError(
                f"unmapped polarity label {foreign_label!r}", doc_id=doc.doc_id
            )
        kwargs = {
            role: _read_span(raw_event.get(foreign), mapping, doc)
            for role, foreign in mapping.roles.items()
        }
        doc.events.append(
            Event(
                trigger=trigger,
                polarity=mapping.polarity_labels[foreign_label],
                **kwargs,
            )
        )
    doc.validate()
    return truncate_document(doc, max_seq_len)


def import_jsonl(
    path: str | os.PathLike, mapping: FieldMapping, max_seq_len: int = 512
) -> Corpus:
    corpus = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                corpus.append(import_record(json.loads(line), mapping, max_seq_len))
    return corpus

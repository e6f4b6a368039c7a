"""JSONL serialization of corpora.

One document per line:

    {"doc_id": str, "text": str, "tokens": [str], "sentence_boundaries": [int],
     "events": [{"trigger": {"start": int, "end": int, "text": str},
                 "subject": {...}|null, "object": {...}|null,
                 "time": {...}|null, "location": {...}|null,
                 "polarity": "P"|"N"|"O"}]}

UTF-8, no BOM. Optional keys "detok", "truncated", and "extra" are read back
when present and written only when non-default, so canonical corpora
round-trip byte for byte.
"""

from __future__ import annotations

import json
import logging
import os
from typing import Any

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
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_SEQ_LEN = 512


def json_dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, compact separators, raw unicode."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _span_to_obj(span: Span | None) -> dict | None:
    if span is None:
        return None
    return {"start": span.start, "end": span.end, "text": span.text}


def _span_from_obj(obj: Any, where: str, doc_id: str, line_no: int | None) -> Span | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: span must be an object or null", doc_id, line_no)
    try:
        start, end, text = obj["start"], obj["end"], obj["text"]
    except KeyError as exc:
        raise ParseError(f"{where}: span missing field {exc.args[0]!r}", doc_id, line_no)
    if not isinstance(start, int) or not isinstance(end, int) or not isinstance(text, str):
        raise ParseError(f"{where}: span fields have wrong types", doc_id, line_no)
    try:
        return Span(start, end, text)
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}", doc_id, line_no)


def document_to_obj(doc: Document) -> dict:
    obj = {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "tokens": list(doc.tokens),
        "sentence_boundaries": list(doc.sentence_boundaries),
        "events": [
            {
                "trigger": _span_to_obj(ev.trigger),
                "subject": _span_to_obj(ev.subject),
                "object": _span_to_obj(ev.object),
                "time": _span_to_obj(ev.time),
                "location": _span_to_obj(ev.location),
                "polarity": ev.polarity,
            }
            for ev in doc.events
        ],
    }
    if doc.detok != "space":
        obj["detok"] = doc.detok
    if doc.truncated:
        obj["truncated"] = True
    if doc.extra:
        obj["extra"] = doc.extra
    return obj


def document_from_obj(obj: Any, line_no: int | None = None) -> Document:
    if not isinstance(obj, dict):
        raise ParseError("document line must be a JSON object", line_no=line_no)
    doc_id = obj.get("doc_id")
    if not isinstance(doc_id, str):
        raise ParseError("missing or non-string doc_id", line_no=line_no)
    text = obj.get("text")
    tokens = obj.get("tokens")
    if not isinstance(text, str):
        raise ParseError("missing or non-string text", doc_id, line_no)
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ParseError("tokens must be a list of strings", doc_id, line_no)
    boundaries = obj.get("sentence_boundaries", [])
    if not isinstance(boundaries, list) or not all(isinstance(b, int) for b in boundaries):
        raise ParseError("sentence_boundaries must be a list of ints", doc_id, line_no)
    raw_events = obj.get("events", [])
    if not isinstance(raw_events, list):
        raise ParseError("events must be a list", doc_id, line_no)
    events = []
    for k, raw in enumerate(raw_events):
        if not isinstance(raw, dict):
            raise ParseError(f"event {k} must be an object", doc_id, line_no)
        trigger = _span_from_obj(raw.get("trigger"), f"event {k} trigger", doc_id, line_no)
        if trigger is None:
            raise ValidationError(f"event {k} has no trigger", doc_id, line_no)
        polarity = raw.get("polarity")
        if polarity not in POLARITIES:
            raise ValidationError(
                f"event {k} has unknown polarity label {polarity!r}", doc_id, line_no
            )
        kwargs = {}
        for role in ROLES:
            kwargs[role] = _span_from_obj(raw.get(role), f"event {k} {role}", doc_id, line_no)
        events.append(Event(trigger=trigger, polarity=polarity, **kwargs))
    doc = Document(
        doc_id=doc_id,
        text=text,
        tokens=tokens,
        sentence_boundaries=boundaries,
        events=events,
        detok=obj.get("detok", "space"),
        truncated=bool(obj.get("truncated", False)),
        extra=obj.get("extra", {}),
    )
    try:
        doc.validate()
    except CorpusError as exc:
        raise ValidationError(exc.message, doc_id, line_no)
    return doc


def truncate_document(doc: Document, max_seq_len: int = DEFAULT_MAX_SEQ_LEN) -> Document:
    """Clip a document to max_seq_len - 2 tokens (two slots reserved for the
    boundary tokens), dropping events whose trigger falls past the cut."""
    limit = max_seq_len - 2
    if len(doc.tokens) <= limit:
        return doc
    doc.tokens = doc.tokens[:limit]
    doc.sentence_boundaries = [b for b in doc.sentence_boundaries if b < limit]
    kept = []
    dropped = 0
    for event in doc.events:
        if event.trigger.end >= limit:
            dropped += 1
            continue
        for role in ROLES:
            span = event.role_span(role)
            if span is not None and span.end >= limit:
                setattr(event, role, None)
        kept.append(event)
    doc.events = kept
    doc.truncated = True
    if dropped:
        logger.warning(
            "doc %s: dropped %d event(s) whose trigger fell outside the %d-token cut",
            doc.doc_id,
            dropped,
            limit,
        )
    return doc


def parse_line(line: str, line_no: int, max_seq_len: int = DEFAULT_MAX_SEQ_LEN) -> Document:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", line_no=line_no)
    doc = document_from_obj(obj, line_no=line_no)
    return truncate_document(doc, max_seq_len)


def load_jsonl(path: str | os.PathLike, max_seq_len: int = DEFAULT_MAX_SEQ_LEN) -> Corpus:
    """Load and validate a corpus; raises CorpusError naming the bad line."""
    corpus = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            corpus.append(parse_line(line, line_no, max_seq_len))
    return corpus


def save_jsonl(corpus: Corpus, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in corpus:
            handle.write(json_dumps(document_to_obj(doc)))
            handle.write("\n")


def corpus_to_jsonl(corpus: Corpus) -> str:
    return "".join(json_dumps(document_to_obj(doc)) + "\n" for doc in corpus)

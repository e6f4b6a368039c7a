"""Data model for documents, events, and spans.

Spans are inclusive token-index pairs into ``Document.tokens``; character
offsets never drive anything, token indexing is authoritative.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterator, Optional

ROLES = ("subject", "object", "time", "location")
POLARITIES = ("P", "N", "O")
DETOK_RULES = ("space", "concat")


class CorpusError(Exception):
    """Base error for corpus loading and validation."""

    def __init__(self, message: str, doc_id: str | None = None, line_no: int | None = None):
        self.doc_id = doc_id
        self.line_no = line_no
        prefix = ""
        if line_no is not None:
            prefix += f"line {line_no}: "
        if doc_id is not None:
            prefix += f"doc {doc_id!r}: "
        super().__init__(prefix + message)
        self.message = message


class ParseError(CorpusError):
    """A line is not valid JSON or misses required fields."""


class ValidationError(CorpusError):
    """A document violates a model invariant (bounds, labels, text alignment)."""


def detokenize(tokens: list[str], rule: str = "space") -> str:
    if rule == "space":
        return " ".join(tokens)
    if rule == "concat":
        return "".join(tokens)
    raise ValueError(f"unknown detokenization rule {rule!r}")


@dataclass(frozen=True)
class Span:
    """Inclusive token-index interval with its surface text."""

    start: int
    end: int
    text: str

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span bounds ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass
class Event:
    """One event: a trigger span, up to one span per argument role, a polarity."""

    trigger: Span
    subject: Optional[Span] = None
    object: Optional[Span] = None
    time: Optional[Span] = None
    location: Optional[Span] = None
    polarity: str = "O"

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValueError(f"unknown polarity label {self.polarity!r}")

    def role_span(self, role: str) -> Optional[Span]:
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        return getattr(self, role)

    def spans(self) -> Iterator[tuple[str, Span]]:
        """Yield (slot, span) for the trigger and every present argument."""
        yield "trigger", self.trigger
        for role in ROLES:
            span = self.role_span(role)
            if span is not None:
                yield role, span


@dataclass
class Document:
    doc_id: str
    text: str
    tokens: list[str]
    sentence_boundaries: list[int] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    detok: str = "space"
    truncated: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    def span_text(self, start: int, end: int) -> str:
        return detokenize(self.tokens[start : end + 1], self.detok)

    def make_span(self, start: int, end: int) -> Span:
        return Span(start, end, self.span_text(start, end))

    def sentence_index(self, token_index: int) -> int:
        """Index of the sentence containing a token (0 when no boundaries given)."""
        if not self.sentence_boundaries:
            return 0
        return bisect.bisect_right(self.sentence_boundaries, token_index) - 1

    def validate(self) -> None:
        """Raise ValidationError on any violated invariant."""
        if self.detok not in DETOK_RULES:
            raise ValidationError(
                f"unknown detokenization rule {self.detok!r}", doc_id=self.doc_id
            )
        m = len(self.tokens)
        bounds = self.sentence_boundaries
        if bounds:
            if bounds[0] != 0:
                raise ValidationError(
                    "sentence boundaries must start at token 0", doc_id=self.doc_id
                )
            for a, b in zip(bounds, bounds[1:]):
                if not 0 <= a < b:
                    raise ValidationError(
                        f"sentence boundaries not strictly increasing: {bounds}",
                        doc_id=self.doc_id,
                    )
            if bounds[-1] >= m and m > 0:
                raise ValidationError(
                    f"sentence boundary {bounds[-1]} outside {m} tokens",
                    doc_id=self.doc_id,
                )
        for k, event in enumerate(self.events):
            for slot, span in event.spans():
                if span.end >= m:
                    raise ValidationError(
                        f"event {k} {slot} span ({span.start}, {span.end}) outside "
                        f"{m}-token text",
                        doc_id=self.doc_id,
                    )
                expected = self.span_text(span.start, span.end)
                if span.text != expected:
                    raise ValidationError(
                        f"event {k} {slot} text {span.text!r} does not match tokens "
                        f"{expected!r}",
                        doc_id=self.doc_id,
                    )

    def event_crosses_sentences(self, event: Event) -> bool:
        sentences = {
            self.sentence_index(span.start) for _, span in event.spans()
        } | {self.sentence_index(span.end) for _, span in event.spans()}
        return len(sentences) > 1


Corpus = list[Document]


def with_events(corpus: Corpus) -> Corpus:
    """Training-time filter: keep only documents carrying at least one event."""
    return [doc for doc in corpus if doc.events]

"""Gold-label target vectors for the three extraction stages.

Layout convention used across the package: a document with m tokens maps to
vectors of length m + 2 where index i < m is token i and the two trailing
slots belong to the boundary tokens. Boundary slots always carry 0 labels,
so token index == vector index everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from eventsent.corpus.data import POLARITIES, ROLES, Document, Event

N_BOUNDARY_TOKENS = 2


def padded_length(n_tokens: int) -> int:
    return n_tokens + N_BOUNDARY_TOKENS


def real_token_mask(n_tokens: int) -> np.ndarray:
    """Boolean vector: True at token positions, False at the boundary slots."""
    mask = np.zeros(padded_length(n_tokens), dtype=bool)
    mask[:n_tokens] = True
    return mask


def _span_vectors(length: int, start: int | None, end: int | None):
    vs = np.zeros(length, dtype=np.float32)
    ve = np.zeros(length, dtype=np.float32)
    if start is not None:
        vs[start] = 1.0
        ve[end] = 1.0
    return vs, ve


@dataclass
class EventLabels:
    """Per-event targets: start/end vectors per role plus the polarity id."""

    role_start: dict[str, np.ndarray]
    role_end: dict[str, np.ndarray]
    polarity_id: int


@dataclass
class LabelTensors:
    trigger_start: np.ndarray
    trigger_end: np.ndarray
    events: list[EventLabels]

    @property
    def polarity_ids(self) -> np.ndarray:
        return np.array([ev.polarity_id for ev in self.events], dtype=np.int64)


def polarity_id(label: str) -> int:
    return POLARITIES.index(label)


def build_label_tensors(doc: Document) -> LabelTensors:
    """Binary start/end targets over the padded length for a validated document."""
    length = padded_length(doc.n_tokens)
    trigger_start = np.zeros(length, dtype=np.float32)
    trigger_end = np.zeros(length, dtype=np.float32)
    events = []
    for event in doc.events:
        trigger_start[event.trigger.start] = 1.0
        trigger_end[event.trigger.end] = 1.0
        role_start = {}
        role_end = {}
        for role in ROLES:
            span = event.role_span(role)
            if span is None:
                vs, ve = _span_vectors(length, None, None)
            else:
                vs, ve = _span_vectors(length, span.start, span.end)
            role_start[role] = vs
            role_end[role] = ve
        events.append(
            EventLabels(
                role_start=role_start,
                role_end=role_end,
                polarity_id=polarity_id(event.polarity),
            )
        )
    return LabelTensors(trigger_start=trigger_start, trigger_end=trigger_end, events=events)


def gold_role_spans(event: Event) -> dict[str, tuple[int, int] | None]:
    return {
        role: None if event.role_span(role) is None
        else (event.role_span(role).start, event.role_span(role).end)
        for role in ROLES
    }

"""Corpus-level descriptive statistics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from eventsent.corpus.data import Corpus
from eventsent.corpus.io import json_dumps


@dataclass
class StatsReport:
    n_docs: int = 0
    avg_tokens: float = 0.0
    avg_sentences: float = 0.0
    n_events: int = 0
    n_multi_event_docs: int = 0
    n_positive_events: int = 0
    n_negative_events: int = 0
    n_neutral_events: int = 0
    n_multi_polarity_docs: int = 0
    n_cross_sentence_events: int = 0

    def to_json(self) -> str:
        return json_dumps(asdict(self))

    def as_dict(self) -> dict:
        return asdict(self)


def corpus_stats(corpus: Corpus) -> StatsReport:
    report = StatsReport(n_docs=len(corpus))
    if not corpus:
        return report
    total_tokens = 0
    total_sentences = 0
    for doc in corpus:
        total_tokens += doc.n_tokens
        total_sentences += max(len(doc.sentence_boundaries), 1 if doc.tokens else 0)
        if len(doc.events) > 1:
            report.n_multi_event_docs += 1
        polarities = set()
        for event in doc.events:
            report.n_events += 1
            polarities.add(event.polarity)
            if event.polarity == "P":
                report.n_positive_events += 1
            elif event.polarity == "N":
                report.n_negative_events += 1
            else:
                report.n_neutral_events += 1
            if doc.event_crosses_sentences(event):
                report.n_cross_sentence_events += 1
        if len(polarities) > 1:
            report.n_multi_polarity_docs += 1
    report.avg_tokens = total_tokens / len(corpus)
    report.avg_sentences = total_sentences / len(corpus)
    return report

"""Exact-span P/R/F1 per subtask, sentiment metrics, and inter-annotator
agreement.

All span matching is exact on both boundaries with no partial credit. The
end-to-end sentiment score counts a prediction as correct when its trigger
span exactly matches a gold trigger and the polarities agree; a stricter
variant additionally requires all four argument spans to match.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from eventsent.corpus.data import POLARITIES, ROLES, Event

SUBTASKS = ("trigger",) + ROLES + ("sentiment",)


class UndefinedAlphaError(ValueError):
    """Agreement is undefined: no pairable ratings."""


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _safe_div(2 * precision * recall, precision + recall)


@dataclass
class SubtaskResult:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return _safe_div(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _safe_div(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def add(self, other: "SubtaskResult") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }

    def as_tuple(self) -> tuple:
        return (self.precision, self.recall, self.f1)


def span_prf(pred_spans, gold_spans) -> SubtaskResult:
    """Multiset exact-match counts over (start, end) pairs."""
    pred = Counter((s[0], s[1]) for s in pred_spans)
    gold = Counter((s[0], s[1]) for s in gold_spans)
    tp = sum((pred & gold).values())
    return SubtaskResult(tp=tp, fp=sum(pred.values()) - tp, fn=sum(gold.values()) - tp)


def _event_key(event: Event, strict: bool):
    trigger = (event.trigger.start, event.trigger.end)
    if not strict:
        return (trigger, event.polarity)
    roles = tuple(
        (span.start, span.end) if span is not None else None
        for span in (event.role_span(role) for role in ROLES)
    )
    return (trigger, event.polarity, roles)


def event_match_sentiment(pred_events, gold_events, strict: bool = False) -> SubtaskResult:
    """A prediction is a true positive when its trigger span and polarity,
    plus all argument spans in strict mode, match an unconsumed gold event;
    matching is greedy in document order."""
    remaining = [_event_key(e, strict) for e in gold_events]
    tp = 0
    for event in pred_events:
        key = _event_key(event, strict)
        if key in remaining:
            remaining.remove(key)
            tp += 1
    return SubtaskResult(tp=tp, fp=len(pred_events) - tp, fn=len(gold_events) - tp)


@dataclass
class MetricReport:
    """Per-subtask exact-match results, serializable and printable."""

    subtasks: dict
    accuracy: float | None = None

    def result(self, name: str) -> SubtaskResult:
        return self.subtasks[name]

    def as_dict(self) -> dict:
        data = {name: res.as_dict() for name, res in self.subtasks.items()}
        if self.accuracy is not None:
            data["accuracy"] = self.accuracy
        return data

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        header = f"{'subtask':<12} {'P':>8} {'R':>8} {'F1':>8} {'TP':>6} {'FP':>6} {'FN':>6}"
        lines = [header, "-" * len(header)]
        for name, res in self.subtasks.items():
            lines.append(
                f"{name:<12} {res.precision:>8.4f} {res.recall:>8.4f} {res.f1:>8.4f} "
                f"{res.tp:>6d} {res.fp:>6d} {res.fn:>6d}"
            )
        if self.accuracy is not None:
            lines.append(f"{'accuracy':<12} {self.accuracy:>8.4f}")
        return "\n".join(lines)


def compare_events(pred_docs_events: list, gold_docs_events: list, strict_sentiment: bool = False) -> MetricReport:
    """Aggregate exact-match counts across aligned document event lists."""
    if len(pred_docs_events) != len(gold_docs_events):
        raise ValueError("prediction/gold document counts disagree")
    totals = {name: SubtaskResult() for name in SUBTASKS}
    for pred_events, gold_events in zip(pred_docs_events, gold_docs_events):
        pred_triggers = [(e.trigger.start, e.trigger.end) for e in pred_events]
        gold_triggers = [(e.trigger.start, e.trigger.end) for e in gold_events]
        totals["trigger"].add(span_prf(pred_triggers, gold_triggers))
        for role in ROLES:
            pred_spans = [
                (s.start, s.end) for s in (e.role_span(role) for e in pred_events) if s
            ]
            gold_spans = [
                (s.start, s.end) for s in (e.role_span(role) for e in gold_events) if s
            ]
            totals[role].add(span_prf(pred_spans, gold_spans))
        totals["sentiment"].add(
            event_match_sentiment(pred_events, gold_events, strict=strict_sentiment)
        )
    return MetricReport(subtasks=totals)


def evaluate_end2end(model, prepared_docs, decode_cfg=None, strict_sentiment: bool = False) -> MetricReport:
    """Run full inference over the documents and score every subtask."""
    pred = [model.extract_events(p, decode_cfg) for p in prepared_docs]
    gold = [list(p.doc.events) for p in prepared_docs]
    return compare_events(pred, gold, strict_sentiment=strict_sentiment)


@dataclass
class ClassificationReport:
    """3-way polarity classification report with averaged P/R/F1 and accuracy."""

    confusion: list
    precision: float
    recall: float
    f1: float
    accuracy: float
    average: str
    per_class: dict

    def as_dict(self) -> dict:
        return {
            "confusion": self.confusion,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "average": self.average,
            "per_class": self.per_class,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        header = f"{'P':>8} {'R':>8} {'F1':>8} {'Acc':>8}"
        row = f"{self.precision:>8.4f} {self.recall:>8.4f} {self.f1:>8.4f} {self.accuracy:>8.4f}"
        return header + "\n" + row

    def as_tuple(self) -> tuple:
        return (self.precision, self.recall, self.f1, self.accuracy)


def classification_report(gold_ids, pred_ids, labels=POLARITIES, average: str = "macro") -> ClassificationReport:
    """Report from parallel gold/predicted class-id sequences.

    Confusion rows are gold classes, columns predicted. Macro averages the
    per-class precision/recall/F1; micro pools the counts (equal to accuracy
    in single-label classification).
    """
    if len(gold_ids) != len(pred_ids):
        raise ValueError("gold/pred lengths disagree")
    if average not in ("macro", "micro"):
        raise ValueError("average must be 'macro' or 'micro'")
    n = len(labels)
    confusion = np.zeros((n, n), dtype=np.int64)
    for g, p in zip(gold_ids, pred_ids):
        confusion[g, p] += 1
    total = int(confusion.sum())
    correct = int(np.trace(confusion))
    accuracy = _safe_div(correct, total)
    per_class = {}
    for c, label in enumerate(labels):
        tp = int(confusion[c, c])
        fp = int(confusion[:, c].sum()) - tp
        fn = int(confusion[c, :].sum()) - tp
        res = SubtaskResult(tp=tp, fp=fp, fn=fn)
        per_class[label] = res.as_dict()
    if average == "macro":
        precision = float(np.mean([per_class[l]["precision"] for l in labels]))
        recall = float(np.mean([per_class[l]["recall"] for l in labels]))
        f1 = float(np.mean([per_class[l]["f1"] for l in labels]))
    else:
        tp = sum(per_class[l]["tp"] for l in labels)
        fp = sum(per_class[l]["fp"] for l in labels)
        fn = sum(per_class[l]["fn"] for l in labels)
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = f1_score(precision, recall)
    return ClassificationReport(
        confusion=confusion.tolist(),
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        average=average,
        per_class=per_class,
    )


def gold_argument_sentiment(model, prepared_docs, average: str = "macro") -> ClassificationReport:
    """Classify every gold event with gold trigger/argument conditioning and
    report averaged P/R/F1 plus accuracy."""
    gold_ids, pred_ids = [], []
    for prepared in prepared_docs:
        predictions = model.classify_gold_events(prepared)
        for event, predicted in zip(prepared.doc.events, predictions):
            gold_ids.append(POLARITIES.index(event.polarity))
            pred_ids.append(POLARITIES.index(predicted))
    return classification_report(gold_ids, pred_ids, average=average)


def krippendorff_alpha(ratings, small_sample_correction: bool = False) -> float:
    """Nominal-metric agreement over a units x annotators matrix with missing
    entries (None or NaN).

    alpha = 1 - D_o / D_e from the coincidence matrix. The default expected
    disagreement uses the plain product form (pair probabilities with
    replacement); ``small_sample_correction=True`` switches to the
    finite-sample form that divides by n*(n-1).
    """
    units = []
    n_annotators = None
    for row in ratings:
        values = []
        row = list(row)
        if n_annotators is None:
            n_annotators = len(row)
        for value in row:
            if value is None:
                continue
            if isinstance(value, float) and np.isnan(value):
                continue
            values.append(value)
        if len(values) >= 2:
            units.append(values)
    if n_annotators is not None and n_annotators < 2:
        raise UndefinedAlphaError("agreement needs at least two annotators")
    if not units:
        raise UndefinedAlphaError("no unit carries two or more ratings; alpha is undefined")

    coincidence: Counter = Counter()
    category_mass: Counter = Counter()
    total = 0.0
    for values in units:
        m = len(values)
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if i == j:
                    continue
                coincidence[(a, b)] += 1.0 / (m - 1)
    for (a, _b), mass in coincidence.items():
        category_mass[a] += mass
        total += mass

    observed = sum(mass for (a, b), mass in coincidence.items() if a != b) / total
    if small_sample_correction:
        expected = sum(
            category_mass[a] * category_mass[b]
            for a in category_mass
            for b in category_mass
            if a != b
        ) / (total * (total - 1))
    else:
        expected = sum(
            category_mass[a] * category_mass[b]
            for a in category_mass
            for b in category_mass
            if a != b
        ) / (total * total)
    if observed == 0.0:
        return 1.0
    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected

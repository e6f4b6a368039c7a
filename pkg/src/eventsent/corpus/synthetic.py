"""Deterministic synthetic corpus generator.

Documents are built from sentence templates over small lexicons so that gold
triggers, argument spans, and polarities are exactly recoverable from the
grammar. Polarity follows a fixed rule: the trigger lexeme carries a
direction (up / down / flat), the subject lexeme carries a valence (good /
bad / neutral), and the event polarity is P when direction and valence agree
in sign, N when they conflict, and O when either is neutral or the subject is
absent. Decoy phrases reuse subject vocabulary in non-argument frames so
models must bind arguments, not just spot lexemes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from eventsent.corpus.data import Corpus, Document, Event

S_SUBJ = "<subj>"
S_TRIG = "<trig>"
S_OBJ = "<obj>"
S_TIME = "<time>"
S_LOC = "<loc>"
S_DECOY = "<decoy>"

_SLOT_ROLE = {S_SUBJ: "subject", S_OBJ: "object", S_TIME: "time", S_LOC: "location"}


class SynthConfigError(ValueError):
    """Raised for unusable generator configs (e.g. empty template set)."""


@dataclass(frozen=True)
class SynthConfig:
    n_docs: int = 100
    multi_event_rate: float = 0.3
    max_events: int = 3
    cross_sentence_rate: float = 0.15
    no_subject_rate: float = 0.2
    decoy_rate: float = 0.3
    filler_sentence_rate: float = 0.2

    triggers_up: tuple[str, ...] = (
        "increased", "rose", "surged", "climbed", "jumped", "edged up",
    )
    triggers_down: tuple[str, ...] = (
        "decreased", "dropped", "fell", "declined", "plunged", "edged down",
    )
    triggers_flat: tuple[str, ...] = ("remained", "stabilized", "hovered")

    subjects_good: tuple[str, ...] = (
        "revenue", "net profit", "sales", "operating income", "gross margin",
    )
    subjects_bad: tuple[str, ...] = (
        "operating costs", "total debt", "impairment losses", "capital expenses",
    )
    subjects_neutral: tuple[str, ...] = ("headcount", "trading volume", "inventory")

    objects: tuple[str, ...] = (
        "3%", "7%", "12%", "28%", "64.65%", "a record high", "market expectations",
    )
    times: tuple[str, ...] = (
        "Q1", "Q3", "2019", "2021", "March", "July", "the third quarter",
    )
    locations: tuple[str, ...] = (
        "Shanghai", "Beijing", "Europe", "the US market", "overseas",
    )

    templates: tuple[tuple[str, ...], ...] = (
        (S_SUBJ, S_TRIG, "by", S_OBJ, "in", S_TIME, "."),
        (S_SUBJ, S_TRIG, S_OBJ, "."),
        ("in", S_TIME, ",", S_SUBJ, S_TRIG, "by", S_OBJ, "at", S_LOC, "."),
        ("the", "group", "said", S_SUBJ, S_TRIG, "in", S_TIME, "."),
        (S_SUBJ, "at", "the", "unit", S_TRIG, "by", S_OBJ, "."),
        ("analysts", "noted", S_SUBJ, S_TRIG, "sharply", "."),
    )
    no_subject_templates: tuple[tuple[str, ...], ...] = (
        ("the", "company", S_TRIG, "in", S_TIME, "."),
        ("management", "said", "it", S_TRIG, "by", S_OBJ, "."),
    )
    lead_in_templates: tuple[tuple[str, ...], ...] = (
        ("as", "for", S_SUBJ, ",", "analysts", "stayed", "cautious", "."),
        ("regarding", S_SUBJ, ",", "the", "outlook", "was", "mixed", "."),
    )
    cross_event_templates: tuple[tuple[str, ...], ...] = (
        ("it", S_TRIG, "by", S_OBJ, "in", S_TIME, "."),
        ("it", S_TRIG, S_OBJ, "."),
    )
    decoy_frames: tuple[tuple[str, ...], ...] = (
        ("despite", S_DECOY, "pressure", ","),
        ("amid", "concerns", "over", S_DECOY, ","),
        ("with", S_DECOY, "in", "focus", ","),
    )
    filler_sentences: tuple[tuple[str, ...], ...] = (
        ("the", "board", "met", "last", "week", "."),
        ("markets", "were", "broadly", "mixed", "."),
        ("no", "further", "guidance", "was", "given", "."),
    )

    def validate(self) -> None:
        if self.n_docs < 0:
            raise SynthConfigError("n_docs must be >= 0")
        if not self.templates or not self.no_subject_templates:
            raise SynthConfigError("template set must not be empty")
        if not (self.triggers_up or self.triggers_down or self.triggers_flat):
            raise SynthConfigError("trigger lexicon must not be empty")
        if not (self.subjects_good or self.subjects_bad or self.subjects_neutral):
            raise SynthConfigError("subject lexicon must not be empty")
        if self.max_events < 2:
            raise SynthConfigError("max_events must be >= 2 to allow multi-event docs")
        for name in (
            "multi_event_rate", "cross_sentence_rate", "no_subject_rate",
            "decoy_rate", "filler_sentence_rate",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SynthConfigError(f"{name} must lie in [0, 1], got {value}")

    def all_triggers(self) -> tuple[str, ...]:
        return self.triggers_up + self.triggers_down + self.triggers_flat

    def all_subjects(self) -> tuple[str, ...]:
        return self.subjects_good + self.subjects_bad + self.subjects_neutral

    def trigger_direction(self, lexeme: str) -> int:
        if lexeme in self.triggers_up:
            return 1
        if lexeme in self.triggers_down:
            return -1
        if lexeme in self.triggers_flat:
            return 0
        raise SynthConfigError(f"unknown trigger lexeme {lexeme!r}")

    def subject_valence(self, lexeme: str) -> int:
        if lexeme in self.subjects_good:
            return 1
        if lexeme in self.subjects_bad:
            return -1
        if lexeme in self.subjects_neutral:
            return 0
        raise SynthConfigError(f"unknown subject lexeme {lexeme!r}")

    def polarity_for(self, trigger_lexeme: str, subject_lexeme: str | None) -> str:
        """The grammar's deterministic polarity rule."""
        if subject_lexeme is None:
            return "O"
        signed = self.trigger_direction(trigger_lexeme) * self.subject_valence(subject_lexeme)
        if signed > 0:
            return "P"
        if signed < 0:
            return "N"
        return "O"


def small_config(n_docs: int, **overrides) -> SynthConfig:
    """Config for quick tests: single-token fillers, no decoys or filler text."""
    cfg = SynthConfig(
        n_docs=n_docs,
        decoy_rate=0.0,
        filler_sentence_rate=0.0,
        cross_sentence_rate=0.0,
    )
    return replace(cfg, **overrides)


@dataclass
class _EventDraft:
    trigger: tuple[int, int]
    roles: dict[str, tuple[int, int]] = field(default_factory=dict)
    trigger_lexeme: str = ""
    subject_lexeme: str | None = None


def _fill(tokens: list[str], filler: str) -> tuple[int, int]:
    words = filler.split(" ")
    start = len(tokens)
    tokens.extend(words)
    return start, len(tokens) - 1


def _render_sentence(
    rng: random.Random,
    cfg: SynthConfig,
    template: tuple[str, ...],
    tokens: list[str],
    subject_lexeme: str | None,
    pending_subject: tuple[int, int] | None,
) -> _EventDraft:
    """Append one sentence to tokens, returning the event it encodes.

    pending_subject carries a subject span emitted in an earlier lead-in
    sentence (the cross-sentence case)."""
    draft = _EventDraft(trigger=(-1, -1))
    if pending_subject is not None:
        draft.roles["subject"] = pending_subject
    for element in template:
        if element == S_TRIG:
            lexeme = rng.choice(cfg.all_triggers())
            draft.trigger = _fill(tokens, lexeme)
            draft.trigger_lexeme = lexeme
        elif element == S_SUBJ:
            assert subject_lexeme is not None
            draft.roles["subject"] = _fill(tokens, subject_lexeme)
        elif element == S_OBJ:
            draft.roles["object"] = _fill(tokens, rng.choice(cfg.objects))
        elif element == S_TIME:
            draft.roles["time"] = _fill(tokens, rng.choice(cfg.times))
        elif element == S_LOC:
            draft.roles["location"] = _fill(tokens, rng.choice(cfg.locations))
        elif element == S_DECOY:
            _fill(tokens, rng.choice(cfg.all_subjects()))
        else:
            tokens.append(element)
    draft.subject_lexeme = subject_lexeme
    return draft


def _lead_in(rng: random.Random, cfg: SynthConfig, tokens: list[str], subject_lexeme: str):
    span = None
    for element in rng.choice(cfg.lead_in_templates):
        if element == S_SUBJ:
            span = _fill(tokens, subject_lexeme)
        else:
            tokens.append(element)
    assert span is not None
    return span


def _generate_document(rng: random.Random, cfg: SynthConfig, doc_id: str) -> Document:
    tokens: list[str] = []
    boundaries: list[int] = []
    drafts: list[_EventDraft] = []

    n_events = 1
    if rng.random() < cfg.multi_event_rate:
        n_events = rng.randint(2, cfg.max_events)
    cross_sentence = rng.random() < cfg.cross_sentence_rate

    if rng.random() < cfg.filler_sentence_rate:
        boundaries.append(len(tokens))
        tokens.extend(rng.choice(cfg.filler_sentences))

    for k in range(n_events):
        no_subject = rng.random() < cfg.no_subject_rate
        subject_lexeme = None if no_subject else rng.choice(cfg.all_subjects())
        pending = None
        if k == 0 and cross_sentence and subject_lexeme is not None:
            boundaries.append(len(tokens))
            pending = _lead_in(rng, cfg, tokens, subject_lexeme)
            template = rng.choice(cfg.cross_event_templates)
        elif subject_lexeme is None:
            template = rng.choice(cfg.no_subject_templates)
        else:
            template = rng.choice(cfg.templates)
        if cfg.decoy_frames and rng.random() < cfg.decoy_rate:
            template = rng.choice(cfg.decoy_frames) + template
        boundaries.append(len(tokens))
        drafts.append(_render_sentence(rng, cfg, template, tokens, subject_lexeme, pending))

    doc = Document(
        doc_id=doc_id,
        text=" ".join(tokens),
        tokens=tokens,
        sentence_boundaries=boundaries,
    )
    for draft in drafts:
        kwargs = {
            role: doc.make_span(start, end)
            for role, (start, end) in draft.roles.items()
        }
        doc.events.append(
            Event(
                trigger=doc.make_span(*draft.trigger),
                polarity=cfg.polarity_for(draft.trigger_lexeme, draft.subject_lexeme),
                **kwargs,
            )
        )
    doc.validate()
    return doc


def generate_synthetic(cfg: SynthConfig, seed: int) -> Corpus:
    """Pure function of (cfg, seed): same inputs give byte-identical corpora."""
    cfg.validate()
    rng = random.Random(seed)
    return [
        _generate_document(rng, cfg, f"synth-{seed}-{i:05d}")
        for i in range(cfg.n_docs)
    ]

"""Per-token POS/NER tagging and the trainable feature embedding tables.

Two tagger backends share one interface: a deterministic rule tagger (lexicon
plus suffix heuristics, used by tests and the synthetic pipeline) and an
adapter over an external tagger toolkit that fails loudly when the toolkit is
not installed. Tag vocabularies are fixed at preprocessing time and persisted
with the checkpoint; unseen tags map to a reserved UNK id.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from eventsent.corpus.data import Document, Event, ROLES
from eventsent.corpus.labels import padded_length

PAD_TAG = "<pad>"
UNK_TAG = "<unk>"
PAD_ID = 0
UNK_ID = 1

RULE_POS_TAGS = (
    PAD_TAG, UNK_TAG,
    "NOUN", "VERB", "NUM", "ADP", "PUNCT", "PROPN", "ADJ", "DET", "PRON", "ADV", "X",
)
RULE_NER_TAGS = (
    PAD_TAG, UNK_TAG,
    "O", "ORG", "MONEY", "DATE", "PERCENT", "GPE",
)

ROLE_ID_ORDER = ("none", "trigger") + ROLES  # fixed priority, trigger wins overlaps
N_ROLE_IDS = len(ROLE_ID_ORDER)


class TaggerUnavailableError(RuntimeError):
    """The selected tagger backend cannot run in this environment."""


class TagVocab:
    """String tag <-> integer id; serialized as a bare JSON array (index = id)."""

    def __init__(self, tags: list[str] | tuple[str, ...]):
        if len(tags) < 2 or tags[PAD_ID] != PAD_TAG or tags[UNK_ID] != UNK_TAG:
            raise ValueError("tag vocabulary must start with the pad and unk tags")
        self.tags = list(tags)
        self._index = {tag: i for i, tag in enumerate(self.tags)}

    def __len__(self) -> int:
        return len(self.tags)

    def id_of(self, tag: str) -> int:
        return self._index.get(tag, UNK_ID)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.tags, handle, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TagVocab":
        with open(path, "r", encoding="utf-8") as handle:
            return cls(json.load(handle))


_NUM_RE = re.compile(r"^[$¥€£]?\d[\d.,]*%?$")
_YEAR_RE = re.compile(r"^(19|20)\d{2}$")
_PUNCT_RE = re.compile(r"^[^\w\s]+$", re.UNICODE)

_DATE_WORDS = {
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december", "monday", "tuesday",
    "wednesday", "thursday", "friday", "saturday", "sunday", "quarter", "week",
    "month", "year", "today", "yesterday",
}
_ADP_WORDS = {"in", "at", "on", "by", "of", "for", "with", "over", "to", "from", "amid", "despite"}
_DET_WORDS = {"the", "a", "an", "this", "that", "its", "their", "our"}
_PRON_WORDS = {"it", "they", "we", "he", "she", "who", "which"}
_ORG_SUFFIXES = {"corp", "inc", "ltd", "co", "group", "holdings", "bank"}
_GPE_WORDS = {
    "shanghai", "beijing", "europe", "asia", "china", "us", "overseas",
    "london", "tokyo",
}


class RuleTagger:
    """Deterministic lexicon+heuristic tagger; no external dependencies.

    ``verb_lexicon`` marks domain trigger words as verbs regardless of
    suffix shape (e.g. "surged", "edged").
    """

    name = "rule"

    def __init__(self, verb_lexicon: set[str] | None = None):
        self.verb_lexicon = set(verb_lexicon or ())
        self.pos_vocab = TagVocab(RULE_POS_TAGS)
        self.ner_vocab = TagVocab(RULE_NER_TAGS)

    def pos_tag_of(self, token: str) -> str:
        lower = token.lower()
        if token in self.verb_lexicon or lower in self.verb_lexicon:
            return "VERB"
        if _NUM_RE.match(token):
            return "NUM"
        if _PUNCT_RE.match(token):
            return "PUNCT"
        if lower in _ADP_WORDS:
            return "ADP"
        if lower in _DET_WORDS:
            return "DET"
        if lower in _PRON_WORDS:
            return "PRON"
        if lower.endswith("ly"):
            return "ADV"
        if lower.endswith(("ed", "ing")) and len(lower) > 4:
            return "VERB"
        if token[:1].isupper() and lower not in _DATE_WORDS:
            return "PROPN"
        if lower.endswith(("ous", "ful", "ive", "al")):
            return "ADJ"
        if token.isalpha() or "-" in token:
            return "NOUN"
        return "X"

    def ner_tag_of(self, token: str) -> str:
        lower = token.lower().rstrip(".,")
        if token.endswith("%"):
            return "PERCENT"
        if token.startswith(("$", "¥", "€", "£")) or lower in {"million", "billion"}:
            return "MONEY"
        if _YEAR_RE.match(token) or lower in _DATE_WORDS or re.match(r"^q[1-4]$", lower):
            return "DATE"
        if lower in _GPE_WORDS:
            return "GPE"
        if lower in _ORG_SUFFIXES or (token[:1].isupper() and lower.endswith(tuple(_ORG_SUFFIXES))):
            return "ORG"
        return "O"

    def tag(self, tokens: list[str]) -> tuple[list[str], list[str]]:
        return (
            [self.pos_tag_of(t) for t in tokens],
            [self.ner_tag_of(t) for t in tokens],
        )


class ExternalTagger:
    """Adapter over the Stanza toolkit; raises when stanza is unavailable."""

    name = "external"

    def __init__(self, lang: str = "en", tagset: str = "upos"):
        if tagset not in ("upos", "xpos"):
            raise ValueError("tagset must be 'upos' or 'xpos'")
        try:
            import stanza  # noqa: F401
        except ImportError as exc:
            raise TaggerUnavailableError(
                "external tagger backend requires the 'stanza' package; "
                "install it or select tagger.backend=rule"
            ) from exc
        self.tagset = tagset
        try:
            self._pipeline = stanza.Pipeline(
                lang=lang,
                processors="tokenize,pos,ner",
                tokenize_pretokenized=True,
                verbose=False,
            )
        except Exception as exc:
            raise TaggerUnavailableError(f"failed to build stanza pipeline: {exc}") from exc

    def tag(self, tokens: list[str]) -> tuple[list[str], list[str]]:
        if not tokens:
            return [], []
        parsed = self._pipeline([tokens])
        pos, ner = [], []
        for sentence in parsed.sentences:
            for word in sentence.words:
                pos.append(word.upos if self.tagset == "upos" else (word.xpos or UNK_TAG))
            for tok in sentence.tokens:
                ner.append(tok.ner.split("-")[-1] if tok.ner != "O" else "O")
        return pos, ner


def make_tagger(backend: str, **kwargs):
    if backend == "rule":
        return RuleTagger(**kwargs)
    if backend == "external":
        return ExternalTagger(**kwargs)
    raise ValueError(f"unknown tagger backend {backend!r}")


@dataclass
class TokenFeatures:
    """Tag ids over the padded layout; boundary slots carry the PAD id 0."""

    pos_ids: np.ndarray
    ner_ids: np.ndarray


def featurize(
    doc_or_tokens, tagger, pos_vocab: TagVocab, ner_vocab: TagVocab
) -> TokenFeatures:
    tokens = doc_or_tokens.tokens if isinstance(doc_or_tokens, Document) else doc_or_tokens
    pos_tags, ner_tags = tagger.tag(list(tokens))
    length = padded_length(len(tokens))
    pos_ids = np.zeros(length, dtype=np.int64)
    ner_ids = np.zeros(length, dtype=np.int64)
    for i, tag in enumerate(pos_tags):
        pos_ids[i] = pos_vocab.id_of(tag)
    for i, tag in enumerate(ner_tags):
        ner_ids[i] = ner_vocab.id_of(tag)
    return TokenFeatures(pos_ids=pos_ids, ner_ids=ner_ids)


def relative_position_ids(m: int, trigger_start: int, clip_radius: int = 256) -> np.ndarray:
    """id_i = clip(i - trigger_start, -L, +L) + L, so ids lie in [0, 2L]."""
    offsets = np.arange(m, dtype=np.int64) - trigger_start
    return np.clip(offsets, -clip_radius, clip_radius) + clip_radius


def role_ids(m: int, event: Event) -> np.ndarray:
    """Per-token role id; the trigger always wins overlaps, then the fixed
    subject > object > time > location priority applies."""
    ids = np.zeros(m, dtype=np.int64)
    slots = [("trigger", event.trigger)] + [
        (role, event.role_span(role)) for role in ROLES
    ]
    for slot_name, span in slots:
        if span is None:
            continue
        slot_id = ROLE_ID_ORDER.index(slot_name)
        for i in range(span.start, min(span.end + 1, m)):
            if ids[i] == 0:
                ids[i] = slot_id
    return ids


def role_ids_from_spans(m: int, trigger: tuple[int, int], spans: dict) -> np.ndarray:
    """Same priority rule, from raw (start, end) pairs instead of an Event."""
    ids = np.zeros(m, dtype=np.int64)
    slots = [("trigger", trigger)] + [(role, spans.get(role)) for role in ROLES]
    for slot_name, pair in slots:
        if pair is None:
            continue
        slot_id = ROLE_ID_ORDER.index(slot_name)
        for i in range(pair[0], min(pair[1] + 1, m)):
            if ids[i] == 0:
                ids[i] = slot_id
    return ids


class FeatureEmbeddings(nn.Module):
    """Trainable POS, NER, relative-position, and argument-role tables."""

    def __init__(
        self,
        n_pos: int,
        n_ner: int,
        feat_dim: int = 128,
        clip_radius: int = 256,
    ):
        super().__init__()
        self.feat_dim = feat_dim
        self.clip_radius = clip_radius
        self.pos_table = nn.Embedding(n_pos, feat_dim, padding_idx=PAD_ID)
        self.ner_table = nn.Embedding(n_ner, feat_dim, padding_idx=PAD_ID)
        self.position_table = nn.Embedding(2 * clip_radius + 1, feat_dim)
        self.role_table = nn.Embedding(N_ROLE_IDS, feat_dim)

    def pos(self, ids: torch.Tensor) -> torch.Tensor:
        return self.pos_table(ids)

    def ner(self, ids: torch.Tensor) -> torch.Tensor:
        return self.ner_table(ids)

    def position(self, ids: torch.Tensor) -> torch.Tensor:
        return self.position_table(ids)

    def role(self, ids: torch.Tensor) -> torch.Tensor:
        return self.role_table(ids)

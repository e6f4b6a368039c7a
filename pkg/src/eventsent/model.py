"""The joint extraction model and its pipeline-mode counterpart.

``JointModel`` shares one contextual encoder across three heads (trigger,
argument, sentiment) and applies the ablation switches by zeroing the
corresponding input vectors, which keeps parameter shapes identical across
all ablations. ``PipelineModel`` chains three independently trained
``JointModel`` instances behind the same inference interface.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict

import torch
from torch import nn

from eventsent.arguments import ArgumentHead, argument_loss, decode_arguments
from eventsent.checkpoint import (
    CheckpointError,
    load_checkpoint,
    load_state_into,
    module_tensors,
    save_checkpoint,
)
from eventsent.corpus.data import POLARITIES, ROLES, Document, Event
from eventsent.corpus.labels import (
    LabelTensors,
    build_label_tensors,
    padded_length,
    real_token_mask,
)
from eventsent.encoder import PretrainedEncoder, SmallEncoder, TokenVocab
from eventsent.features import (
    FeatureEmbeddings,
    TagVocab,
    TokenFeatures,
    featurize,
    make_tagger,
    relative_position_ids,
    role_ids_from_spans,
)
from eventsent.sentiment import SentimentHead, sentiment_loss
from eventsent.triggers import TriggerHead, TriggerScores, decode_trigger_spans, trigger_loss

MODEL_FORMAT = "event-sentiment-joint"


@dataclass
class ModelConfig:
    """Architecture plus ablation switches; all switches keep shapes stable."""

    encoder_backend: str = "small"
    pretrained_name: str | None = None
    hidden: int = 64
    n_layers: int = 2
    n_heads: int = 4
    feat_dim: int = 128
    clip_radius: int = 256
    max_seq_len: int = 512
    dropout: float = 0.1
    use_position: bool = True
    use_features: bool = True
    use_trigger_info: bool = True
    use_argument_info: bool = True
    tagger_backend: str = "rule"

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class DecodeConfig:
    """Span decoding hyperparameters for inference."""

    trigger_threshold: float = 0.5
    max_trigger_len: int = 10
    argument_threshold: float = 0.5
    max_arg_offset: int = 30


@dataclass
class PreparedDocument:
    """A document plus its padded tag ids, mask, and optional gold tensors."""

    doc: Document
    pos_ids: torch.Tensor
    ner_ids: torch.Tensor
    real_mask: torch.Tensor
    labels: LabelTensors | None = None

    @property
    def n_tokens(self) -> int:
        return len(self.doc.tokens)

    @property
    def n_rows(self) -> int:
        return padded_length(self.n_tokens)


class Preprocessor:
    """Tags documents and builds padded id tensors plus gold label tensors."""

    def __init__(self, tagger, pos_vocab: TagVocab, ner_vocab: TagVocab):
        self.tagger = tagger
        self.pos_vocab = pos_vocab
        self.ner_vocab = ner_vocab

    def prepare(self, doc: Document, with_labels: bool = True) -> PreparedDocument:
        feats: TokenFeatures = featurize(doc, self.tagger, self.pos_vocab, self.ner_vocab)
        labels = build_label_tensors(doc) if with_labels else None
        return PreparedDocument(
            doc=doc,
            pos_ids=torch.from_numpy(feats.pos_ids),
            ner_ids=torch.from_numpy(feats.ner_ids),
            real_mask=torch.from_numpy(real_token_mask(len(doc.tokens))),
            labels=labels,
        )

    def prepare_corpus(self, corpus, with_labels: bool = True) -> list:
        return [self.prepare(doc, with_labels=with_labels) for doc in corpus]


@dataclass
class DocumentLosses:
    total: torch.Tensor
    trigger: torch.Tensor
    argument: torch.Tensor
    sentiment: torch.Tensor


def _overlap(a: tuple, b: tuple) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]) + 1)


def _align_trigger(gold: tuple, decoded: list) -> tuple:
    """Conditioning span for a gold event when training on decoded triggers:
    the decoded span overlapping the gold trigger the most (ties to the
    earliest), falling back to the gold span when nothing overlaps."""
    best = gold
    best_overlap = 0
    for span in decoded:
        ov = _overlap(gold, span)
        if ov > best_overlap:
            best = span
            best_overlap = ov
    return best


class JointModel(nn.Module):
    def __init__(self, config: ModelConfig, token_vocab: TokenVocab | None,
                 pos_vocab: TagVocab, ner_vocab: TagVocab,
                 trigger_lexicon=None):
        super().__init__()
        self.config = config
        self.pos_vocab = pos_vocab
        self.ner_vocab = ner_vocab
        self.trigger_lexicon = sorted(set(trigger_lexicon or ()))
        if config.encoder_backend == "small":
            if token_vocab is None:
                raise ValueError("small encoder backend requires a token vocabulary")
            self.encoder = SmallEncoder(
                vocab=token_vocab,
                hidden=config.hidden,
                n_layers=config.n_layers,
                n_heads=config.n_heads,
                max_seq_len=config.max_seq_len,
                dropout=config.dropout,
                use_position=config.use_position,
            )
        elif config.encoder_backend == "pretrained":
            if not config.pretrained_name:
                raise ValueError("pretrained encoder backend requires pretrained_name")
            self.encoder = PretrainedEncoder(config.pretrained_name)
        else:
            raise ValueError(f"unknown encoder backend {config.encoder_backend!r}")
        width = self.encoder.width
        self.features = FeatureEmbeddings(
            n_pos=len(pos_vocab),
            n_ner=len(ner_vocab),
            feat_dim=config.feat_dim,
            clip_radius=config.clip_radius,
        )
        self.trigger_head = TriggerHead(width, config.feat_dim, config.dropout)
        self.argument_head = ArgumentHead(self.trigger_head.d_model, config.feat_dim, config.dropout)
        self.sentiment_head = SentimentHead(self.trigger_head.d_model, config.feat_dim)

    # ---- forward pieces ------------------------------------------------

    def fuse_batch(self, prepared: list) -> list:
        """Encode a batch of documents and fuse tag features; returns one
        fused row matrix per document."""
        encoded = self.encoder.encode_batch([list(p.doc.tokens) for p in prepared])
        fused = []
        for enc, prep in zip(encoded, prepared):
            pos_vec = self.features.pos(prep.pos_ids)
            ner_vec = self.features.ner(prep.ner_ids)
            if not self.config.use_features:
                pos_vec = torch.zeros_like(pos_vec)
                ner_vec = torch.zeros_like(ner_vec)
            fused.append(self.trigger_head.fuse(enc.vectors, pos_vec, ner_vec))
        return fused

    def trigger_scores(self, fused: torch.Tensor) -> TriggerScores:
        return self.trigger_head.score(fused)

    def condition_event(self, fused: torch.Tensor, trigger: tuple) -> torch.Tensor:
        n_rows = fused.shape[0]
        if not (0 <= trigger[0] <= trigger[1] < n_rows):
            raise ValueError(f"trigger {trigger} out of bounds for {n_rows} rows")
        position_ids = torch.from_numpy(
            relative_position_ids(n_rows, trigger[0], self.config.clip_radius)
        )
        position_vec = self.features.position(position_ids)
        head = fused[trigger[0]].expand(n_rows, -1)
        tail = fused[trigger[1]].expand(n_rows, -1)
        if not self.config.use_trigger_info:
            head = torch.zeros_like(head)
            tail = torch.zeros_like(tail)
            position_vec = torch.zeros_like(position_vec)
        return self.argument_head.fusion(
            torch.cat([fused, head, tail, position_vec], dim=-1)
        )

    def role_vectors(self, n_rows: int, trigger: tuple, spans: dict) -> torch.Tensor:
        ids = torch.from_numpy(role_ids_from_spans(n_rows, trigger, spans))
        vec = self.features.role(ids)
        if not self.config.use_argument_info:
            vec = torch.zeros_like(vec)
        return vec

    def event_logits(
        self, conditioned: torch.Tensor, trigger: tuple, spans: dict, real_mask: torch.Tensor
    ) -> torch.Tensor:
        role_vec = self.role_vectors(conditioned.shape[0], trigger, spans)
        v = self.sentiment_head.event_representation(conditioned, role_vec, real_mask)
        return self.sentiment_head.logits(v)

    # ---- training losses ----------------------------------------------

    def document_losses(
        self,
        prepared: PreparedDocument,
        fused: torch.Tensor,
        trigger_source: str = "gold",
        decode_cfg: DecodeConfig | None = None,
        loss_heads: tuple = ("trigger", "argument", "sentiment"),
    ) -> DocumentLosses:
        """Teacher-forced losses for one document against its gold labels.

        With trigger_source="predicted", argument/sentiment conditioning uses
        the decoded trigger span when it exactly matches the gold one, else
        falls back to the gold span; losses always target gold labels.
        """
        if prepared.labels is None:
            raise ValueError("document_losses requires gold label tensors")
        labels = prepared.labels
        mask = prepared.real_mask
        zero = fused.sum() * 0.0

        scores = self.trigger_scores(fused)
        if "trigger" in loss_heads:
            l_t = trigger_loss(
                scores,
                torch.from_numpy(labels.trigger_start),
                torch.from_numpy(labels.trigger_end),
                mask,
            )
        else:
            l_t = zero

        decoded_triggers = []
        if trigger_source == "predicted":
            decode_cfg = decode_cfg or DecodeConfig()
            decoded_triggers = decode_trigger_spans(
                scores.p_start.detach().numpy(),
                scores.p_end.detach().numpy(),
                prepared.n_tokens,
                decode_cfg.trigger_threshold,
                decode_cfg.max_trigger_len,
            )
        elif trigger_source != "gold":
            raise ValueError(f"unknown trigger_source {trigger_source!r}")

        event_scores = []
        event_role_labels = []
        event_logits = []
        polarity_ids = []
        for k, event in enumerate(prepared.doc.events):
            gold_trigger = (event.trigger.start, event.trigger.end)
            trigger = _align_trigger(gold_trigger, decoded_triggers)
            conditioned = self.condition_event(fused, trigger)
            if "argument" in loss_heads:
                event_scores.append(self.argument_head.score(conditioned))
                role_labels = {}
                for role in ROLES:
                    role_labels[role] = (
                        torch.from_numpy(labels.events[k].role_start[role]),
                        torch.from_numpy(labels.events[k].role_end[role]),
                    )
                event_role_labels.append(role_labels)
            if "sentiment" in loss_heads:
                gold_spans = {
                    role: (span.start, span.end)
                    for role, span in ((r, event.role_span(r)) for r in ROLES)
                    if span is not None
                }
                event_logits.append(
                    self.event_logits(conditioned, trigger, gold_spans, mask)
                )
                polarity_ids.append(labels.events[k].polarity_id)

        l_a = argument_loss(event_scores, event_role_labels, mask) if "argument" in loss_heads else zero
        l_c = sentiment_loss(event_logits, polarity_ids) if "sentiment" in loss_heads else zero
        return DocumentLosses(total=l_t + l_a + l_c, trigger=l_t, argument=l_a, sentiment=l_c)

    # ---- inference -----------------------------------------------------

    def extract_events(self, prepared: PreparedDocument, decode_cfg: DecodeConfig | None = None) -> list:
        """Decode triggers, then per-trigger arguments, then polarity."""
        decode_cfg = decode_cfg or DecodeConfig()
        was_training = self.training
        self.eval()
        try:
            with torch.no_grad():
                fused = self.fuse_batch([prepared])[0]
                events = self._extract_from_fused(prepared, fused, decode_cfg)
        finally:
            if was_training:
                self.train()
        return events

    def _extract_from_fused(
        self, prepared: PreparedDocument, fused: torch.Tensor, decode_cfg: DecodeConfig
    ) -> list:
        scores = self.trigger_scores(fused)
        triggers = decode_trigger_spans(
            scores.p_start.numpy(),
            scores.p_end.numpy(),
            prepared.n_tokens,
            decode_cfg.trigger_threshold,
            decode_cfg.max_trigger_len,
        )
        seen = set()
        events = []
        for trigger in triggers:
            if trigger in seen:
                continue
            seen.add(trigger)
            events.append(self._build_event(prepared, fused, trigger, decode_cfg))
        events.sort(key=lambda e: (e.trigger.start, e.trigger.end))
        return events

    def _build_event(
        self,
        prepared: PreparedDocument,
        fused: torch.Tensor,
        trigger: tuple,
        decode_cfg: DecodeConfig,
    ) -> Event:
        doc = prepared.doc
        conditioned = self.condition_event(fused, trigger)
        role_scores = self.argument_head.score(conditioned)
        spans = decode_arguments(
            role_scores,
            prepared.n_tokens,
            decode_cfg.argument_threshold,
            decode_cfg.max_arg_offset,
        )
        spans = {role: span for role, span in spans.items() if span is not None}
        logits = self.event_logits(conditioned, trigger, spans, prepared.real_mask)
        polarity = POLARITIES[int(torch.argmax(logits).item())]
        role_spans = {
            role: doc.make_span(span[0], span[1]) for role, span in spans.items()
        }
        return Event(
            trigger=doc.make_span(trigger[0], trigger[1]),
            subject=role_spans.get("subject"),
            object=role_spans.get("object"),
            time=role_spans.get("time"),
            location=role_spans.get("location"),
            polarity=polarity,
        )

    # ---- sentiment with gold spans (gold-argument evaluation) ----------

    def classify_gold_events(self, prepared: PreparedDocument) -> list:
        """Polarity predictions for each gold event, conditioning on gold
        trigger and argument spans."""
        was_training = self.training
        self.eval()
        try:
            with torch.no_grad():
                fused = self.fuse_batch([prepared])[0]
                out = []
                for event in prepared.doc.events:
                    trigger = (event.trigger.start, event.trigger.end)
                    conditioned = self.condition_event(fused, trigger)
                    gold_spans = {
                        role: (span.start, span.end)
                        for role, span in ((r, event.role_span(r)) for r in ROLES)
                        if span is not None
                    }
                    logits = self.event_logits(conditioned, trigger, gold_spans, prepared.real_mask)
                    out.append(POLARITIES[int(torch.argmax(logits).item())])
        finally:
            if was_training:
                self.train()
        return out

    # ---- persistence ---------------------------------------------------

    def save(self, path: str | os.PathLike) -> None:
        metadata = {
            "format": MODEL_FORMAT,
            "model_config": self.config.as_dict(),
            "pos_vocab": self.pos_vocab.tags,
            "ner_vocab": self.ner_vocab.tags,
            "trigger_lexicon": self.trigger_lexicon,
        }
        if isinstance(self.encoder, SmallEncoder):
            metadata["token_vocab"] = self.encoder.vocab.words
        save_checkpoint(path, metadata, module_tensors(self))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "JointModel":
        metadata, tensors = load_checkpoint(path)
        if metadata.get("format") != MODEL_FORMAT:
            raise CheckpointError(
                f"checkpoint at {path} has format {metadata.get('format')!r}, "
                f"expected {MODEL_FORMAT!r}"
            )
        config = ModelConfig.from_dict(metadata["model_config"])
        token_vocab = (
            TokenVocab(metadata["token_vocab"]) if "token_vocab" in metadata else None
        )
        model = cls(
            config,
            token_vocab,
            TagVocab(metadata["pos_vocab"]),
            TagVocab(metadata["ner_vocab"]),
            trigger_lexicon=metadata.get("trigger_lexicon"),
        )
        load_state_into(model, tensors)
        model.eval()
        return model

    def make_preprocessor(self) -> Preprocessor:
        kwargs = {}
        if self.config.tagger_backend == "rule" and self.trigger_lexicon:
            kwargs["verb_lexicon"] = set(self.trigger_lexicon)
        tagger = make_tagger(self.config.tagger_backend, **kwargs)
        return Preprocessor(tagger, self.pos_vocab, self.ner_vocab)


PIPELINE_FORMAT = "event-sentiment-pipeline"
PIPELINE_STAGES = ("trigger", "argument", "sentiment")


class PipelineModel:
    """Three separately trained joint-architecture models chained at
    inference: trigger decoding from the first, argument decoding from the
    second, polarity from the third. Exposes the same extract_events
    interface as JointModel."""

    def __init__(self, trigger_model: JointModel, argument_model: JointModel,
                 sentiment_model: JointModel):
        self.trigger_model = trigger_model
        self.argument_model = argument_model
        self.sentiment_model = sentiment_model
        self.config = trigger_model.config

    def eval(self):
        for model in (self.trigger_model, self.argument_model, self.sentiment_model):
            model.eval()
        return self

    def extract_events(self, prepared: PreparedDocument, decode_cfg: DecodeConfig | None = None) -> list:
        decode_cfg = decode_cfg or DecodeConfig()
        doc = prepared.doc
        self.eval()
        with torch.no_grad():
            fused_t = self.trigger_model.fuse_batch([prepared])[0]
            scores = self.trigger_model.trigger_scores(fused_t)
            triggers = decode_trigger_spans(
                scores.p_start.numpy(),
                scores.p_end.numpy(),
                prepared.n_tokens,
                decode_cfg.trigger_threshold,
                decode_cfg.max_trigger_len,
            )
            fused_a = self.argument_model.fuse_batch([prepared])[0]
            fused_s = self.sentiment_model.fuse_batch([prepared])[0]
            seen = set()
            events = []
            for trigger in triggers:
                if trigger in seen:
                    continue
                seen.add(trigger)
                conditioned_a = self.argument_model.condition_event(fused_a, trigger)
                spans = decode_arguments(
                    self.argument_model.argument_head.score(conditioned_a),
                    prepared.n_tokens,
                    decode_cfg.argument_threshold,
                    decode_cfg.max_arg_offset,
                )
                spans = {role: span for role, span in spans.items() if span is not None}
                conditioned_s = self.sentiment_model.condition_event(fused_s, trigger)
                logits = self.sentiment_model.event_logits(
                    conditioned_s, trigger, spans, prepared.real_mask
                )
                polarity = POLARITIES[int(torch.argmax(logits).item())]
                role_spans = {
                    role: doc.make_span(span[0], span[1]) for role, span in spans.items()
                }
                events.append(
                    Event(
                        trigger=doc.make_span(trigger[0], trigger[1]),
                        subject=role_spans.get("subject"),
                        object=role_spans.get("object"),
                        time=role_spans.get("time"),
                        location=role_spans.get("location"),
                        polarity=polarity,
                    )
                )
        events.sort(key=lambda e: (e.trigger.start, e.trigger.end))
        return events

    def classify_gold_events(self, prepared: PreparedDocument) -> list:
        return self.sentiment_model.classify_gold_events(prepared)

    def make_preprocessor(self) -> Preprocessor:
        return self.trigger_model.make_preprocessor()

    def save(self, path: str | os.PathLike) -> None:
        os.makedirs(path, exist_ok=True)
        with open(os.path.join(path, "metadata.json"), "w", encoding="utf-8") as handle:
            json.dump(
                {"format": PIPELINE_FORMAT, "format_version": 1, "stages": list(PIPELINE_STAGES)},
                handle,
                indent=2,
                sort_keys=True,
            )
        self.trigger_model.save(os.path.join(path, "trigger"))
        self.argument_model.save(os.path.join(path, "argument"))
        self.sentiment_model.save(os.path.join(path, "sentiment"))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineModel":
        return cls(
            JointModel.load(os.path.join(path, "trigger")),
            JointModel.load(os.path.join(path, "argument")),
            JointModel.load(os.path.join(path, "sentiment")),
        )


def load_model(path: str | os.PathLike):
    """Load either a joint checkpoint or a pipeline checkpoint directory."""
    meta_path = os.path.join(path, "metadata.json")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"checkpoint metadata not found: {meta_path}")
    with open(meta_path, "r", encoding="utf-8") as handle:
        metadata = json.load(handle)
    if metadata.get("format") == PIPELINE_FORMAT:
        return PipelineModel.load(path)
    return JointModel.load(path)

"""Joint training of the encoder and the three heads, plus gradient checking.

The loss of a step is the batch mean of per-document totals, where each
document's total is the sum of its trigger, argument, and sentiment losses.
Checkpoints are selected on held-out end-to-end sentiment F1, ties broken by
the earlier epoch. All runs are seeded and single-threaded for determinism.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass, field, asdict

import torch

from eventsent.corpus.data import Corpus, Document, Event
from eventsent.encoder import TokenVocab
from eventsent.evaluation import evaluate_end2end
from eventsent.features import RULE_NER_TAGS, RULE_POS_TAGS, TagVocab
from eventsent.model import (
    DecodeConfig,
    JointModel,
    ModelConfig,
    PipelineModel,
)

ALL_HEADS = ("trigger", "argument", "sentiment")


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    """Optimization and ablation settings; architecture fields mirror
    ModelConfig and are forwarded to it."""

    learning_rate: float | None = None
    dropout: float = 0.1
    max_seq_len: int = 512
    batch_size: int = 8
    epochs: int = 10
    seeds: tuple = (0, 1, 2, 3, 4)
    grad_clip: float = 1.0
    pipeline_mode: bool = False
    use_features: bool = True
    use_trigger_info: bool = True
    use_argument_info: bool = True
    trigger_source: str = "gold"
    encoder_backend: str = "small"
    pretrained_name: str | None = None
    hidden: int = 64
    n_layers: int = 2
    n_heads: int = 4
    feat_dim: int = 128
    clip_radius: int = 256
    freeze_layers: int = 0
    tagger_backend: str = "rule"
    decode: DecodeConfig = field(default_factory=DecodeConfig)

    def validate(self) -> None:
        if self.resolved_learning_rate() <= 0:
            raise TrainingError("learning rate must be positive")
        if not self.seeds:
            raise TrainingError("at least one seed is required")
        if self.batch_size < 1 or self.epochs < 1:
            raise TrainingError("batch size and epochs must be at least 1")
        if self.trigger_source not in ("gold", "predicted"):
            raise TrainingError(f"unknown trigger_source {self.trigger_source!r}")

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 1e-5 if self.encoder_backend == "pretrained" else 1e-3

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            encoder_backend=self.encoder_backend,
            pretrained_name=self.pretrained_name,
            hidden=self.hidden,
            n_layers=self.n_layers,
            n_heads=self.n_heads,
            feat_dim=self.feat_dim,
            clip_radius=self.clip_radius,
            max_seq_len=self.max_seq_len,
            dropout=self.dropout,
            use_features=self.use_features,
            use_trigger_info=self.use_trigger_info,
            use_argument_info=self.use_argument_info,
            tagger_backend=self.tagger_backend,
        )

    def as_dict(self) -> dict:
        data = asdict(self)
        data["seeds"] = list(self.seeds)
        return data


@dataclass
class StepLosses:
    total: float
    trigger: float
    argument: float
    sentiment: float


def trigger_token_lexicon(corpus: Corpus) -> set:
    """Every token that appears inside any gold trigger span."""
    lexicon = set()
    for doc in corpus:
        for event in doc.events:
            for i in range(event.trigger.start, event.trigger.end + 1):
                lexicon.add(doc.tokens[i])
    return lexicon


def build_model(config: TrainConfig, train_corpus: Corpus) -> JointModel:
    token_vocab = None
    if config.encoder_backend == "small":
        token_vocab = TokenVocab.build([train_corpus])
    model = JointModel(
        config.model_config(),
        token_vocab,
        TagVocab(RULE_POS_TAGS),
        TagVocab(RULE_NER_TAGS),
        trigger_lexicon=trigger_token_lexicon(train_corpus),
    )
    if config.freeze_layers:
        model.encoder.freeze_layers(config.freeze_layers)
    return model


class Trainer:
    """Adam optimization over batches of documents with JSONL step logging."""

    def __init__(
        self,
        model: JointModel,
        config: TrainConfig,
        loss_heads: tuple = ALL_HEADS,
        log_path: str | None = None,
    ):
        self.model = model
        self.config = config
        self.loss_heads = loss_heads
        self.optimizer = torch.optim.Adam(
            [p for p in model.parameters() if p.requires_grad],
            lr=config.resolved_learning_rate(),
        )
        self.step = 0
        self._log_handle = open(log_path, "a", encoding="utf-8") if log_path else None

    def close(self) -> None:
        if self._log_handle:
            self._log_handle.close()
            self._log_handle = None

    def joint_step(self, batch: list) -> StepLosses:
        """One optimizer update on a batch of prepared documents; returns the
        reported loss components (batch means)."""
        if not batch:
            raise TrainingError("empty batch")
        self.model.train()
        self.optimizer.zero_grad()
        fused_list = self.model.fuse_batch(batch)
        totals = []
        for prepared, fused in zip(batch, fused_list):
            totals.append(
                self.model.document_losses(
                    prepared,
                    fused,
                    trigger_source=self.config.trigger_source,
                    decode_cfg=self.config.decode,
                    loss_heads=self.loss_heads,
                )
            )
        n = len(totals)
        loss = sum(d.total for d in totals) / n
        components = StepLosses(
            total=float(loss.detach()),
            trigger=float(sum(float(d.trigger.detach()) for d in totals)) / n,
            argument=float(sum(float(d.argument.detach()) for d in totals)) / n,
            sentiment=float(sum(float(d.sentiment.detach()) for d in totals)) / n,
        )
        if not math.isfinite(components.total):
            raise TrainingError(
                "non-finite loss; aborting. batch docs: "
                + ", ".join(p.doc.doc_id for p in batch)
                + f"; components trigger={components.trigger} "
                f"argument={components.argument} sentiment={components.sentiment}"
            )
        loss.backward()
        if self.config.grad_clip and self.config.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.config.grad_clip)
        self.optimizer.step()
        self.step += 1
        if self._log_handle:
            record = {
                "step": self.step,
                "L": components.total,
                "L_t": components.trigger,
                "L_a": components.argument,
                "L_c": components.sentiment,
                "lr": self.optimizer.param_groups[0]["lr"],
            }
            self._log_handle.write(json.dumps(record, sort_keys=True) + "\n")
            self._log_handle.flush()
        return components


def seed_everything(seed: int) -> None:
    random.seed(seed)
    torch.manual_seed(seed)
    torch.set_num_threads(1)


@dataclass
class SeedResult:
    seed: int
    checkpoint_path: str
    best_epoch: int
    dev_sentiment_f1: float


@dataclass
class TrainResult:
    """Per-seed checkpoints plus the dev-selected best."""

    per_seed: list
    best_seed: int
    best_path: str

    def as_dict(self) -> dict:
        return {
            "per_seed": [asdict(r) for r in self.per_seed],
            "best_seed": self.best_seed,
            "best_path": self.best_path,
        }


def _epoch_batches(n_docs: int, batch_size: int, rng: random.Random) -> list:
    order = list(range(n_docs))
    rng.shuffle(order)
    return [order[i : i + batch_size] for i in range(0, n_docs, batch_size)]


def _dev_sentiment_f1(model, dev_prepared, decode_cfg) -> float:
    if not dev_prepared:
        return 0.0
    report = evaluate_end2end(model, dev_prepared, decode_cfg)
    return report.result("sentiment").f1


def _train_joint_seed(
    config: TrainConfig,
    seed: int,
    train_corpus: Corpus,
    dev_corpus: Corpus,
    seed_dir: str,
) -> SeedResult:
    seed_everything(seed)
    model = build_model(config, train_corpus)
    preproc = model.make_preprocessor()
    train_prepared = preproc.prepare_corpus([d for d in train_corpus if d.events])
    dev_prepared = preproc.prepare_corpus(dev_corpus)
    os.makedirs(seed_dir, exist_ok=True)
    trainer = Trainer(
        model, config, loss_heads=ALL_HEADS, log_path=os.path.join(seed_dir, "train_log.jsonl")
    )
    best_f1 = -1.0
    best_epoch = 0
    try:
        for epoch in range(1, config.epochs + 1):
            rng = random.Random(seed * 100003 + epoch)
            for batch_idx in _epoch_batches(len(train_prepared), config.batch_size, rng):
                trainer.joint_step([train_prepared[i] for i in batch_idx])
            f1 = _dev_sentiment_f1(model, dev_prepared, config.decode)
            if f1 > best_f1:
                best_f1 = f1
                best_epoch = epoch
                model.save(seed_dir)
        if best_epoch == 0:
            model.save(seed_dir)
            best_epoch = config.epochs
    finally:
        trainer.close()
    return SeedResult(
        seed=seed,
        checkpoint_path=seed_dir,
        best_epoch=best_epoch,
        dev_sentiment_f1=max(best_f1, 0.0),
    )


def _mean_dev_loss(model, dev_prepared, config: TrainConfig, loss_heads: tuple) -> float:
    if not dev_prepared:
        return 0.0
    model.eval()
    total = 0.0
    with torch.no_grad():
        fused_list = model.fuse_batch(dev_prepared)
        for prepared, fused in zip(dev_prepared, fused_list):
            losses = model.document_losses(
                prepared, fused, trigger_source="gold", loss_heads=loss_heads
            )
            total += float(losses.total)
    return total / len(dev_prepared)


def _train_pipeline_seed(
    config: TrainConfig,
    seed: int,
    train_corpus: Corpus,
    dev_corpus: Corpus,
    seed_dir: str,
) -> SeedResult:
    """Three separate models trained sequentially on their own losses; each
    stage keeps its lowest-dev-loss epoch; the chained triple is scored on
    dev end-to-end sentiment F1 for cross-seed selection."""
    stage_models = {}
    os.makedirs(seed_dir, exist_ok=True)
    event_docs = [d for d in train_corpus if d.events]
    for stage in ("trigger", "argument", "sentiment"):
        seed_everything(seed)
        model = build_model(config, train_corpus)
        preproc = model.make_preprocessor()
        train_prepared = preproc.prepare_corpus(event_docs)
        dev_prepared = preproc.prepare_corpus([d for d in dev_corpus if d.events])
        stage_dir = os.path.join(seed_dir, stage)
        trainer = Trainer(
            model,
            config,
            loss_heads=(stage,),
            log_path=os.path.join(seed_dir, f"train_log_{stage}.jsonl"),
        )
        best_loss = float("inf")
        saved = False
        try:
            for epoch in range(1, config.epochs + 1):
                rng = random.Random(seed * 100003 + epoch)
                for batch_idx in _epoch_batches(len(train_prepared), config.batch_size, rng):
                    trainer.joint_step([train_prepared[i] for i in batch_idx])
                dev_loss = _mean_dev_loss(model, dev_prepared, config, (stage,))
                if dev_loss < best_loss:
                    best_loss = dev_loss
                    model.save(stage_dir)
                    saved = True
            if not saved:
                model.save(stage_dir)
        finally:
            trainer.close()
        stage_models[stage] = JointModel.load(stage_dir)
    pipeline = PipelineModel(
        stage_models["trigger"], stage_models["argument"], stage_models["sentiment"]
    )
    pipeline.save(seed_dir)
    preproc = pipeline.make_preprocessor()
    dev_prepared = preproc.prepare_corpus(dev_corpus)
    f1 = _dev_sentiment_f1(pipeline, dev_prepared, config.decode)
    return SeedResult(
        seed=seed, checkpoint_path=seed_dir, best_epoch=config.epochs, dev_sentiment_f1=f1
    )


def train(
    config: TrainConfig,
    train_corpus: Corpus,
    dev_corpus: Corpus,
    out_dir: str | os.PathLike,
) -> TrainResult:
    """Train one model per seed and select the best on dev sentiment F1."""
    config.validate()
    if not train_corpus:
        raise TrainingError("training split is empty")
    if not any(doc.events for doc in train_corpus):
        raise TrainingError("training split has no event-bearing documents")
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "train_config.json"), "w", encoding="utf-8") as handle:
        json.dump(config.as_dict(), handle, indent=2, sort_keys=True)
    results = []
    for seed in config.seeds:
        seed_dir = os.path.join(out_dir, f"seed-{seed}")
        if config.pipeline_mode:
            results.append(_train_pipeline_seed(config, seed, train_corpus, dev_corpus, seed_dir))
        else:
            results.append(_train_joint_seed(config, seed, train_corpus, dev_corpus, seed_dir))
    best = max(results, key=lambda r: r.dev_sentiment_f1)
    best_dir = os.path.join(out_dir, "best")
    if config.pipeline_mode:
        PipelineModel.load(best.checkpoint_path).save(best_dir)
    else:
        JointModel.load(best.checkpoint_path).save(best_dir)
    result = TrainResult(per_seed=results, best_seed=best.seed, best_path=best_dir)
    with open(os.path.join(out_dir, "train_result.json"), "w", encoding="utf-8") as handle:
        json.dump(result.as_dict(), handle, indent=2, sort_keys=True)
    return result


# ---- gradient checking -------------------------------------------------

SELECTORS = ("classifier", "trigger_head", "argument_head", "sentiment_head",
             "features", "encoder", "full")


@dataclass
class GradientCheckEntry:
    tensor: str
    max_rel_deviation: float
    passed: bool


@dataclass
class GradientCheckReport:
    tolerance: float
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list:
        return [e.tensor for e in self.entries if not e.passed]

    @property
    def max_deviation(self) -> float:
        return max((e.max_rel_deviation for e in self.entries), default=0.0)

    def as_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failures": self.failures,
            "entries": [asdict(e) for e in self.entries],
        }


def _gradient_check_document() -> Document:
    tokens = ["sales", "rose", "sharply", "in", "june"]
    doc = Document(
        doc_id="gradcheck-0",
        text=" ".join(tokens),
        tokens=tokens,
        sentence_boundaries=[0],
        events=[],
    )
    doc.events.append(
        Event(
            trigger=doc.make_span(1, 1),
            subject=doc.make_span(0, 0),
            object=None,
            time=doc.make_span(4, 4),
            location=None,
            polarity="P",
        )
    )
    doc.validate()
    return doc


def _selected_parameters(model: JointModel, selector: str) -> list:
    if selector == "classifier":
        return [
            ("sentiment_head.classifier.weight", model.sentiment_head.classifier.weight),
            ("sentiment_head.classifier.bias", model.sentiment_head.classifier.bias),
        ]
    if selector == "full":
        return [(name, p) for name, p in model.named_parameters()]
    prefix = {
        "trigger_head": "trigger_head.",
        "argument_head": "argument_head.",
        "sentiment_head": "sentiment_head.",
        "features": "features.",
        "encoder": "encoder.",
    }.get(selector)
    if prefix is None:
        raise ValueError(f"unknown gradient check selector {selector!r}; choose from {SELECTORS}")
    return [(name, p) for name, p in model.named_parameters() if name.startswith(prefix)]


def gradient_check(
    selector: str = "full",
    tolerance: float = 1e-4,
    seed: int = 0,
    epsilon: float = 1e-5,
) -> GradientCheckReport:
    """Compare analytic gradients of the total document loss against central
    finite differences, in double precision, on a tiny model."""
    seed_everything(seed)
    doc = _gradient_check_document()
    config = TrainConfig(
        hidden=8, n_layers=2, n_heads=2, feat_dim=4, clip_radius=8, dropout=0.0,
        max_seq_len=32,
    )
    model = build_model(config, [doc])
    model.double()
    model.eval()
    prepared = model.make_preprocessor().prepare(doc)

    def loss_value() -> torch.Tensor:
        fused = model.fuse_batch([prepared])[0]
        return model.document_losses(prepared, fused).total

    model.zero_grad()
    loss = loss_value()
    loss.backward()
    entries = []
    for name, param in _selected_parameters(model, selector):
        analytic = (
            param.grad.detach().clone()
            if param.grad is not None
            else torch.zeros_like(param)
        )
        flat = param.data.view(-1)
        numeric = torch.zeros_like(flat)
        for i in range(flat.numel()):
            original = float(flat[i])
            flat[i] = original + epsilon
            with torch.no_grad():
                up = float(loss_value())
            flat[i] = original - epsilon
            with torch.no_grad():
                down = float(loss_value())
            flat[i] = original
            numeric[i] = (up - down) / (2 * epsilon)
        numeric = numeric.view_as(param)
        diff = (analytic - numeric).abs()
        # Relative deviation with an absolute floor: elements whose gradients
        # are below the floor are dominated by finite-difference noise, so
        # they are judged on absolute error instead.
        scale = (analytic.abs() + numeric.abs()).clamp(min=1e-3)
        rel = (diff / scale).max().item() if diff.numel() else 0.0
        entries.append(
            GradientCheckEntry(tensor=name, max_rel_deviation=rel, passed=rel <= tolerance)
        )
    return GradientCheckReport(tolerance=tolerance, entries=entries)

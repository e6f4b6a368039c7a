"""Command-line entry point.

Subcommands: synth, stats, train, eval, predict, agreement, gradcheck.
Exit codes: 0 success, 1 validation or data failure, 2 usage error.
Every subcommand accepts --config / --set / env overrides and echoes the
effective configuration to stderr at startup; JSON outputs use sorted keys.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from eventsent.checkpoint import CheckpointError
from eventsent.config import Config, ConfigError, load_config, parse_set_flags
from eventsent.corpus.data import CorpusError
from eventsent.corpus.io import load_jsonl, save_jsonl
from eventsent.corpus.splits import split_corpus
from eventsent.corpus.stats import corpus_stats
from eventsent.corpus.synthetic import SynthConfig, SynthConfigError, generate_synthetic
from eventsent.evaluation import (
    UndefinedAlphaError,
    evaluate_end2end,
    gold_argument_sentiment,
    krippendorff_alpha,
)
from eventsent.model import load_model
from eventsent.pipeline import predict_file
from eventsent.training import TrainingError, gradient_check, train

TRAIN_ABLATIONS = {
    "full": {},
    "pipeline": {"train.pipeline_mode": True},
    "no-feature": {"train.use_features": False},
    "no-trigger-info": {"train.use_trigger_info": False},
    "no-argument-info": {"train.use_argument_info": False},
    "no-trigger-argument": {
        "train.use_trigger_info": False,
        "train.use_argument_info": False,
    },
}

EVAL_ABLATIONS = {
    "full": {},
    "no-feature": {"use_features": False},
    "no-trigger-info": {"use_trigger_info": False},
    "no-argument-info": {"use_argument_info": False},
    "no-trigger-argument": {"use_trigger_info": False, "use_argument_info": False},
}


class CliError(RuntimeError):
    pass


def _resolve_config(args, extra_overrides=None) -> Config:
    overrides = parse_set_flags(getattr(args, "set", None))
    overrides.update(extra_overrides or {})
    config = load_config(getattr(args, "config", None), overrides)
    print(config.to_json(), file=sys.stderr)
    return config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="seed override for this command")


def cmd_synth(args) -> int:
    _resolve_config(args)
    seed = args.seed if args.seed is not None else 0
    cfg = SynthConfig(
        n_docs=args.docs,
        multi_event_rate=args.multi_event_rate,
        cross_sentence_rate=args.cross_sentence_rate,
        no_subject_rate=args.no_subject_rate,
        decoy_rate=args.decoy_rate,
        filler_sentence_rate=args.filler_rate,
    )
    corpus = generate_synthetic(cfg, seed)
    save_jsonl(corpus, args.out)
    print(json.dumps({"documents": len(corpus), "out": args.out, "seed": seed}, sort_keys=True))
    return 0


def cmd_stats(args) -> int:
    config = _resolve_config(args)
    corpus = load_jsonl(args.input, max_seq_len=config["train.max_seq_len"])
    report = corpus_stats(corpus)
    print(report.to_json())
    if args.expect:
        with open(args.expect, "r", encoding="utf-8") as handle:
            expected = json.load(handle)
        actual = report.as_dict()
        mismatches = []
        for field, want in sorted(expected.items()):
            if field not in actual:
                mismatches.append(f"{field}: unknown statistic")
            elif actual[field] != want:
                mismatches.append(f"{field}: expected {want}, got {actual[field]}")
        if mismatches:
            for line in mismatches:
                print(f"mismatch: {line}", file=sys.stderr)
            return 1
        print("all expected statistics match", file=sys.stderr)
    return 0


def _load_splits(args, config: Config):
    max_len = config["train.max_seq_len"]
    if args.data:
        corpus = load_jsonl(args.data, max_seq_len=max_len)
        split_seed = args.seed if args.seed is not None else 0
        return split_corpus(corpus, seed=split_seed)[:2]
    if not args.train or not args.dev:
        raise CliError("provide either --data or both --train and --dev")
    return (
        load_jsonl(args.train, max_seq_len=max_len),
        load_jsonl(args.dev, max_seq_len=max_len),
    )


def cmd_train(args) -> int:
    extra = dict(TRAIN_ABLATIONS[args.ablation])
    if args.seed is not None:
        extra["train.seeds"] = [args.seed]
    config = _resolve_config(args, extra)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "effective_config.json"), "w", encoding="utf-8") as handle:
        handle.write(config.to_json() + "\n")
    train_corpus, dev_corpus = _load_splits(args, config)
    result = train(config.train_config(), train_corpus, dev_corpus, args.out)
    print(json.dumps(result.as_dict(), sort_keys=True))
    return 0


def _prepared_for_eval(model, corpus):
    preproc = model.make_preprocessor()
    return preproc.prepare_corpus(corpus)


def cmd_eval(args) -> int:
    config = _resolve_config(args)
    model = load_model(args.model)
    for flag, value in EVAL_ABLATIONS[args.ablation].items():
        target = model.config
        setattr(target, flag, value)
        if hasattr(model, "trigger_model"):
            for stage in (model.trigger_model, model.argument_model, model.sentiment_model):
                setattr(stage.config, flag, value)
    corpus = load_jsonl(args.data, max_seq_len=config["train.max_seq_len"])
    prepared = _prepared_for_eval(model, corpus)
    if args.mode == "end2end":
        report = evaluate_end2end(
            model,
            prepared,
            config.decode_config(),
            strict_sentiment=config["metric.strict_sentiment"],
        )
    else:
        report = gold_argument_sentiment(model, prepared, average=config["metric.average"])
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.format_table())
    return 0


def cmd_predict(args) -> int:
    config = _resolve_config(args)
    model = load_model(args.model)
    summary = predict_file(
        model,
        args.input,
        args.output,
        decode_cfg=config.decode_config(),
        max_seq_len=config["train.max_seq_len"],
    )
    print(json.dumps(summary.as_dict(), sort_keys=True))
    return 1 if summary.n_errors else 0


def cmd_agreement(args) -> int:
    _resolve_config(args)
    with open(args.input, "r", encoding="utf-8") as handle:
        ratings = json.load(handle)
    alpha = krippendorff_alpha(ratings, small_sample_correction=args.small_sample_correction)
    print(json.dumps({"alpha": alpha}, sort_keys=True))
    return 0


def cmd_gradcheck(args) -> int:
    _resolve_config(args)
    report = gradient_check(
        selector=args.module,
        tolerance=args.tolerance,
        seed=args.seed if args.seed is not None else 0,
    )
    print(json.dumps(report.as_dict(), sort_keys=True, indent=2))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventsent",
        description="Event-level sentiment analysis: extraction, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    _add_common(p)
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--multi-event-rate", type=float, default=0.3)
    p.add_argument("--cross-sentence-rate", type=float, default=0.15)
    p.add_argument("--no-subject-rate", type=float, default=0.2)
    p.add_argument("--decoy-rate", type=float, default=0.3)
    p.add_argument("--filler-rate", type=float, default=0.2)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="corpus statistics, optionally checked against expectations")
    _add_common(p)
    p.add_argument("input")
    p.add_argument("--expect", help="JSON file of expected statistic values")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train models across seeds and select on dev")
    _add_common(p)
    p.add_argument("--data", help="single corpus file; split 80/10/10 internally")
    p.add_argument("--train", dest="train", help="training split JSONL")
    p.add_argument("--dev", help="development split JSONL")
    p.add_argument("--out", required=True, help="output directory for checkpoints")
    p.add_argument("--ablation", choices=sorted(TRAIN_ABLATIONS), default="full")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a trained model on a labeled corpus")
    _add_common(p)
    p.add_argument("--model", required=True, help="checkpoint directory")
    p.add_argument("--data", required=True, help="labeled JSONL corpus")
    p.add_argument("--mode", choices=("end2end", "gold-args"), default="end2end")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--ablation", choices=sorted(EVAL_ABLATIONS), default="full")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="annotate a JSONL file with predicted events")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("agreement", help="Krippendorff alpha over a ratings matrix")
    _add_common(p)
    p.add_argument("--input", required=True, help="JSON units x annotators matrix (null = missing)")
    p.add_argument("--small-sample-correction", action="store_true")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    _add_common(p)
    p.add_argument("--module", default="full")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (
        CliError,
        CorpusError,
        ConfigError,
        SynthConfigError,
        TrainingError,
        UndefinedAlphaError,
        CheckpointError,
        FileNotFoundError,
        NotADirectoryError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

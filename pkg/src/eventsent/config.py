"""Flat dotted-key configuration with layered overrides.

Precedence, highest first: command-line flags, environment variables
(prefix ``EVENTSENT_``, dots become underscores, upper-cased), config file
(flat JSON object), built-in defaults. Values are coerced to the type of the
key's default; unknown keys fail loudly.
"""

from __future__ import annotations

import json
import os

from eventsent.model import DecodeConfig
from eventsent.training import TrainConfig

ENV_PREFIX = "EVENTSENT_"


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "train.learning_rate": None,
    "train.dropout": 0.1,
    "train.max_seq_len": 512,
    "train.batch_size": 8,
    "train.epochs": 10,
    "train.seeds": [0, 1, 2, 3, 4],
    "train.grad_clip": 1.0,
    "train.pipeline_mode": False,
    "train.use_features": True,
    "train.use_trigger_info": True,
    "train.use_argument_info": True,
    "train.trigger_source": "gold",
    "encoder.backend": "small",
    "encoder.pretrained_name": None,
    "encoder.hidden": 64,
    "encoder.n_layers": 2,
    "encoder.n_heads": 4,
    "encoder.freeze_layers": 0,
    "features.feat_dim": 128,
    "features.clip_radius": 256,
    "tagger.backend": "rule",
    "decode.trigger.threshold": 0.5,
    "decode.trigger.max_len": 10,
    "decode.argument.threshold": 0.5,
    "decode.argument.max_len": 30,
    "metric.average": "macro",
    "metric.strict_sentiment": False,
}

# Types for keys whose default is None.
NONE_TYPES = {
    "train.learning_rate": float,
    "encoder.pretrained_name": str,
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "_").upper()


def _coerce(key: str, value):
    """Coerce a raw override (often a string) to the key's declared type."""
    default = DEFAULTS[key]
    target = type(default) if default is not None else NONE_TYPES[key]
    if value is None:
        return None
    if target is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _BOOL_TRUE:
            return True
        if text in _BOOL_FALSE:
            return False
        raise ConfigError(f"{key}: cannot parse {value!r} as a boolean")
    if target is int:
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer, got a boolean")
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot parse {value!r} as an integer")
        if as_float != int(as_float):
            raise ConfigError(f"{key}: {value!r} is not an integer")
        return int(as_float)
    if target is float:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot parse {value!r} as a number")
    if target is list:
        if isinstance(value, list):
            items = value
        else:
            text = str(value).strip()
            try:
                items = json.loads(text)
            except json.JSONDecodeError:
                items = [part for part in text.split(",") if part.strip()]
            if not isinstance(items, list):
                raise ConfigError(f"{key}: cannot parse {value!r} as a list")
        try:
            return [int(item) for item in items]
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: list items must be integers")
    return str(value)


class Config:
    """Resolved configuration; dotted-key lookup plus typed accessors."""

    def __init__(self, values: dict):
        self.values = values

    def __getitem__(self, key: str):
        if key not in self.values:
            raise ConfigError(f"unknown config key {key!r}")
        return self.values[key]

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def as_dict(self) -> dict:
        return dict(sorted(self.values.items()))

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(
            trigger_threshold=self["decode.trigger.threshold"],
            max_trigger_len=self["decode.trigger.max_len"],
            argument_threshold=self["decode.argument.threshold"],
            max_arg_offset=self["decode.argument.max_len"],
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self["train.learning_rate"],
            dropout=self["train.dropout"],
            max_seq_len=self["train.max_seq_len"],
            batch_size=self["train.batch_size"],
            epochs=self["train.epochs"],
            seeds=tuple(self["train.seeds"]),
            grad_clip=self["train.grad_clip"],
            pipeline_mode=self["train.pipeline_mode"],
            use_features=self["train.use_features"],
            use_trigger_info=self["train.use_trigger_info"],
            use_argument_info=self["train.use_argument_info"],
            trigger_source=self["train.trigger_source"],
            encoder_backend=self["encoder.backend"],
            pretrained_name=self["encoder.pretrained_name"],
            hidden=self["encoder.hidden"],
            n_layers=self["encoder.n_layers"],
            n_heads=self["encoder.n_heads"],
            feat_dim=self["features.feat_dim"],
            clip_radius=self["features.clip_radius"],
            freeze_layers=self["encoder.freeze_layers"],
            tagger_backend=self["tagger.backend"],
            decode=self.decode_config(),
        )


def load_config(
    config_path: str | os.PathLike | None = None,
    overrides: dict | None = None,
    env: dict | None = None,
) -> Config:
    """Merge defaults, config file, environment, and explicit overrides."""
    env = os.environ if env is None else env
    values = dict(DEFAULTS)
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in data.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r} in {config_path}")
            values[key] = _coerce(key, value)
    for key in DEFAULTS:
        name = env_name(key)
        if name in env:
            values[key] = _coerce(key, env[name])
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, value)
    return Config(values)


def parse_set_flags(pairs: list) -> dict:
    """Parse repeated ``--set key=value`` flags."""
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides

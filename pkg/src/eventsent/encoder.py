"""Contextual token encoders.

Two interchangeable backends behind one ``encode_document`` contract:

- ``SmallEncoder``: a trainable 2-layer self-attention encoder (hidden size 64
  by default) with learned token and absolute-position embeddings. Cheap
  enough for CI and desk-scale runs.
- ``PretrainedEncoder``: a wrapper over a Hugging Face masked-LM encoder for
  full-scale runs; imported lazily and absent-safe.

Row layout of every encoded document: row i holds token i for i < m, and the
two boundary-marker rows sit at tail indices m and m+1 (sequence start then
sequence end). ``special_token_mask`` marks those two rows.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import torch
from torch import nn

from eventsent.checkpoint import (
    CheckpointError,
    load_checkpoint,
    load_state_into,
    module_tensors,
    save_checkpoint,
)
from eventsent.corpus.data import Document
from eventsent.corpus.labels import N_BOUNDARY_TOKENS, padded_length

PAD_WORD = "<pad>"
UNK_WORD = "<unk>"
BOS_WORD = "<bos>"
EOS_WORD = "<eos>"
PAD_WORD_ID = 0
UNK_WORD_ID = 1
BOS_WORD_ID = 2
EOS_WORD_ID = 3
SPECIAL_WORDS = (PAD_WORD, UNK_WORD, BOS_WORD, EOS_WORD)


class EncoderUnavailableError(RuntimeError):
    """The selected encoder backend cannot run in this environment."""


class TokenVocab:
    """Word <-> id for the small encoder; JSON array on disk (index = id)."""

    def __init__(self, words: list[str] | tuple[str, ...]):
        if tuple(words[: len(SPECIAL_WORDS)]) != SPECIAL_WORDS:
            raise ValueError(f"token vocabulary must start with {SPECIAL_WORDS}")
        self.words = list(words)
        self._index = {word: i for i, word in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def id_of(self, word: str) -> int:
        return self._index.get(word, UNK_WORD_ID)

    def ids_of(self, tokens: list[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.words, handle, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TokenVocab":
        with open(path, "r", encoding="utf-8") as handle:
            return cls(json.load(handle))

    @classmethod
    def build(cls, corpora, min_count: int = 1) -> "TokenVocab":
        counts: dict[str, int] = {}
        for corpus in corpora:
            for doc in corpus:
                for token in doc.tokens:
                    counts[token] = counts.get(token, 0) + 1
        words = list(SPECIAL_WORDS) + sorted(
            w for w, c in counts.items() if c >= min_count
        )
        return cls(words)


@dataclass
class EncodedDocument:
    """Token representations over the padded layout (m real rows + 2 tail
    boundary rows); ``special_token_mask`` is True exactly on the tail rows."""

    vectors: torch.Tensor
    special_token_mask: torch.Tensor

    @property
    def n_rows(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def n_tokens(self) -> int:
        return self.n_rows - N_BOUNDARY_TOKENS

    @property
    def width(self) -> int:
        return int(self.vectors.shape[1])


def boundary_mask(n_tokens: int) -> torch.Tensor:
    mask = torch.zeros(padded_length(n_tokens), dtype=torch.bool)
    mask[n_tokens:] = True
    return mask


class SmallEncoder(nn.Module):
    """2-layer self-attention encoder with learned token + position tables.

    ``use_position=False`` drops the additive absolute-position signal, which
    makes the encoder translation-covariant over the padded sequence.
    """

    backend_name = "small"

    def __init__(
        self,
        vocab: TokenVocab,
        hidden: int = 64,
        n_layers: int = 2,
        n_heads: int = 4,
        ffn_dim: int | None = None,
        max_seq_len: int = 512,
        dropout: float = 0.1,
        use_position: bool = True,
    ):
        super().__init__()
        if hidden % n_heads != 0:
            raise ValueError("hidden size must be divisible by the head count")
        self.vocab = vocab
        self.hidden = hidden
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.ffn_dim = ffn_dim if ffn_dim is not None else 2 * hidden
        self.max_seq_len = max_seq_len
        self.use_position = use_position
        self.token_table = nn.Embedding(len(vocab), hidden, padding_idx=PAD_WORD_ID)
        self.position_table = nn.Embedding(max_seq_len, hidden)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden,
            nhead=n_heads,
            dim_feedforward=self.ffn_dim,
            dropout=dropout,
            batch_first=True,
        )
        self.layers = nn.TransformerEncoder(layer, num_layers=n_layers, enable_nested_tensor=False)
        self.out_dropout = nn.Dropout(dropout)

    @property
    def width(self) -> int:
        return self.hidden

    def forward(self, padded_ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        """padded_ids: B x T word ids for [bos, w_1.., eos, pad..];
        pad_mask: B x T bool, True on pad slots."""
        x = self.token_table(padded_ids)
        if self.use_position:
            positions = torch.arange(padded_ids.shape[1], device=padded_ids.device)
            x = x + self.position_table(positions)[None, :, :]
        hidden = self.layers(x, src_key_padding_mask=pad_mask)
        return self.out_dropout(hidden)

    def encode_batch(self, token_lists: list[list[str]]) -> list[EncodedDocument]:
        if not token_lists:
            return []
        lengths = [len(tokens) for tokens in token_lists]
        for n in lengths:
            if n + N_BOUNDARY_TOKENS > self.max_seq_len:
                raise ValueError(
                    f"sequence of {n} tokens exceeds max length {self.max_seq_len} "
                    "after boundary markers; truncate upstream"
                )
        width = max(lengths) + N_BOUNDARY_TOKENS
        batch = torch.full((len(token_lists), width), PAD_WORD_ID, dtype=torch.long)
        pad_mask = torch.ones((len(token_lists), width), dtype=torch.bool)
        for b, tokens in enumerate(token_lists):
            seq = [BOS_WORD_ID] + self.vocab.ids_of(tokens) + [EOS_WORD_ID]
            batch[b, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            pad_mask[b, : len(seq)] = False
        hidden = self.forward(batch, pad_mask)
        out = []
        for b, n in enumerate(lengths):
            rows = torch.cat(
                [hidden[b, 1 : n + 1], hidden[b, 0:1], hidden[b, n + 1 : n + 2]], dim=0
            )
            out.append(EncodedDocument(vectors=rows, special_token_mask=boundary_mask(n)))
        return out

    def encode_tokens(self, tokens: list[str]) -> EncodedDocument:
        return self.encode_batch([tokens])[0]

    def encode_document(self, doc: Document) -> EncodedDocument:
        return self.encode_tokens(list(doc.tokens))

    def freeze_layers(self, n: int) -> None:
        """Freeze the embedding tables plus the first n self-attention layers."""
        if n < 0:
            raise ValueError("freeze count must be non-negative")
        if n == 0:
            return
        for param in self.token_table.parameters():
            param.requires_grad_(False)
        for param in self.position_table.parameters():
            param.requires_grad_(False)
        for layer in self.layers.layers[: n - 1]:
            for param in layer.parameters():
                param.requires_grad_(False)

    def metadata(self) -> dict:
        return {
            "backend": self.backend_name,
            "hidden": self.hidden,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "ffn_dim": self.ffn_dim,
            "max_seq_len": self.max_seq_len,
            "use_position": self.use_position,
            "vocab": self.vocab.words,
        }

    def save(self, path: str | os.PathLike) -> None:
        save_checkpoint(path, self.metadata(), module_tensors(self))

    @classmethod
    def from_metadata(cls, metadata: dict) -> "SmallEncoder":
        return cls(
            vocab=TokenVocab(metadata["vocab"]),
            hidden=metadata["hidden"],
            n_layers=metadata["n_layers"],
            n_heads=metadata["n_heads"],
            ffn_dim=metadata.get("ffn_dim"),
            max_seq_len=metadata["max_seq_len"],
            use_position=metadata.get("use_position", True),
        )


class PretrainedEncoder(nn.Module):
    """Wrapper over a Hugging Face transformer encoder.

    Each whitespace token is represented by its first sub-word piece; the
    sequence-start and sequence-end marker states fill the tail boundary rows.
    Requires the optional `transformers` dependency.
    """

    backend_name = "pretrained"

    def __init__(self, model_name_or_path: str):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderUnavailableError(
                "pretrained encoder backend requires the 'transformers' package; "
                "install the [transformer] extra or select the small backend"
            ) from exc
        if not os.path.exists(model_name_or_path) and os.sep in str(model_name_or_path):
            raise FileNotFoundError(f"pretrained weights not found: {model_name_or_path}")
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
            self.model = AutoModel.from_pretrained(model_name_or_path)
        except EnvironmentError as exc:
            raise FileNotFoundError(
                f"pretrained weights not found: {model_name_or_path}"
            ) from exc
        self.hidden = int(self.model.config.hidden_size)
        self.max_seq_len = int(getattr(self.model.config, "max_position_embeddings", 512))

    @property
    def width(self) -> int:
        return self.hidden

    def encode_tokens(self, tokens: list[str]) -> EncodedDocument:
        n = len(tokens)
        if n == 0:
            enc = self.tokenizer([[]], is_split_into_words=True, return_tensors="pt")
        else:
            enc = self.tokenizer(
                [tokens],
                is_split_into_words=True,
                return_tensors="pt",
                truncation=True,
                max_length=self.max_seq_len,
            )
        states = self.model(**enc).last_hidden_state[0]
        word_ids = enc.word_ids(0)
        first_piece = {}
        for piece_index, word_index in enumerate(word_ids):
            if word_index is not None and word_index not in first_piece:
                first_piece[word_index] = piece_index
        rows = torch.zeros((padded_length(n), self.hidden), dtype=states.dtype)
        for i in range(n):
            if i in first_piece:
                rows[i] = states[first_piece[i]]
        rows[n] = states[0]
        rows[n + 1] = states[-1]
        return EncodedDocument(vectors=rows, special_token_mask=boundary_mask(n))

    def encode_batch(self, token_lists: list[list[str]]) -> list[EncodedDocument]:
        return [self.encode_tokens(tokens) for tokens in token_lists]

    def encode_document(self, doc: Document) -> EncodedDocument:
        return self.encode_tokens(list(doc.tokens))

    def freeze_layers(self, n: int) -> None:
        if n < 0:
            raise ValueError("freeze count must be non-negative")
        if n == 0:
            return
        for param in self.model.embeddings.parameters():
            param.requires_grad_(False)
        for layer in self.model.encoder.layer[: n - 1]:
            for param in layer.parameters():
                param.requires_grad_(False)


def load_pretrained(weights_path: str | os.PathLike):
    """Load an encoder backend from a checkpoint directory.

    The metadata's `backend` field selects the class; weight shapes are
    validated and mismatches name the offending tensors.
    """
    metadata, tensors = load_checkpoint(weights_path)
    backend = metadata.get("backend")
    if backend == SmallEncoder.backend_name:
        encoder = SmallEncoder.from_metadata(metadata)
        load_state_into(encoder, tensors)
        return encoder
    if backend == PretrainedEncoder.backend_name:
        return PretrainedEncoder(metadata["model_name_or_path"])
    raise CheckpointError(f"unknown encoder backend in metadata: {backend!r}")

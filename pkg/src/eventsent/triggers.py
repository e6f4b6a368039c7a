"""Feature fusion, trigger start/end scoring, trigger loss, and span decoding.

Scoring is per-token logistic regression over the fused representation; the
decoder pairs thresholded starts with the nearest following thresholded end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from eventsent.layers import FusionFFN, binary_cross_entropy


@dataclass
class TriggerScores:
    """Start/end probabilities over the padded row layout."""

    p_start: torch.Tensor
    p_end: torch.Tensor


class TriggerHead(nn.Module):
    """Fuses word + tag features and scores every token as trigger start/end."""

    def __init__(self, encoder_width: int, feat_dim: int = 128, dropout: float = 0.1):
        super().__init__()
        self.d_model = encoder_width
        self.fusion = FusionFFN(encoder_width + 2 * feat_dim, self.d_model, dropout)
        self.start_scorer = nn.Linear(self.d_model, 1)
        self.end_scorer = nn.Linear(self.d_model, 1)

    def fuse(
        self,
        word_vectors: torch.Tensor,
        pos_vectors: torch.Tensor,
        ner_vectors: torch.Tensor,
    ) -> torch.Tensor:
        if not (word_vectors.shape[0] == pos_vectors.shape[0] == ner_vectors.shape[0]):
            raise ValueError("word/pos/ner row counts disagree")
        return self.fusion(torch.cat([word_vectors, pos_vectors, ner_vectors], dim=-1))

    def score(self, fused: torch.Tensor) -> TriggerScores:
        return TriggerScores(
            p_start=torch.sigmoid(self.start_scorer(fused).squeeze(-1)),
            p_end=torch.sigmoid(self.end_scorer(fused).squeeze(-1)),
        )


def trigger_loss(
    scores: TriggerScores,
    start_labels: torch.Tensor,
    end_labels: torch.Tensor,
    real_mask: torch.Tensor,
) -> torch.Tensor:
    """Mean over real tokens of start BCE plus end BCE."""
    mask = real_mask.to(scores.p_start.dtype)
    n = mask.sum().clamp(min=1.0)
    per_token = binary_cross_entropy(scores.p_start, start_labels) + binary_cross_entropy(
        scores.p_end, end_labels
    )
    return (per_token * mask).sum() / n


def decode_trigger_spans(
    p_start: np.ndarray,
    p_end: np.ndarray,
    n_tokens: int,
    threshold: float = 0.5,
    max_trigger_len: int = 10,
) -> list[tuple[int, int]]:
    """Pair thresholded starts with the nearest following thresholded end.

    A start i takes the smallest end j with i <= j, span length <= the
    trigger length cap, and j before the next start; with no such end it
    falls back to the single-token span (i, i). Only real token rows
    (index < n_tokens) participate.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    starts = [i for i in range(n_tokens) if p_start[i] >= threshold]
    ends = [j for j in range(n_tokens) if p_end[j] >= threshold]
    spans = []
    for idx, i in enumerate(starts):
        next_start = starts[idx + 1] if idx + 1 < len(starts) else n_tokens
        chosen = None
        for j in ends:
            if j < i:
                continue
            if j - i + 1 > max_trigger_len or j >= next_start:
                break
            chosen = j
            break
        spans.append((i, chosen if chosen is not None else i))
    return spans

"""Trigger-conditioned representations, per-role span scoring, and decoding.

Each candidate event conditions every token on the trigger's head and tail
vectors plus a relative-position embedding; four role-specific start/end
classifiers then score spans for subject, object, time, and location.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from eventsent.corpus.data import ROLES
from eventsent.layers import FusionFFN, binary_cross_entropy


@dataclass
class RoleScores:
    """Per-role start/end probabilities over the padded row layout."""

    p_start: dict
    p_end: dict


class ArgumentHead(nn.Module):
    """Shared conditioning FFN with per-role start/end affine scorers."""

    def __init__(self, d_model: int, feat_dim: int = 128, dropout: float = 0.1):
        super().__init__()
        self.d_model = d_model
        self.fusion = FusionFFN(3 * d_model + feat_dim, d_model, dropout)
        self.start_scorers = nn.ModuleDict({role: nn.Linear(d_model, 1) for role in ROLES})
        self.end_scorers = nn.ModuleDict({role: nn.Linear(d_model, 1) for role in ROLES})

    def condition(
        self,
        fused: torch.Tensor,
        trigger_start: int,
        trigger_end: int,
        position_vectors: torch.Tensor,
    ) -> torch.Tensor:
        """Every row receives the same trigger head/tail vectors plus its own
        relative-position embedding."""
        n_rows = fused.shape[0]
        if not (0 <= trigger_start <= trigger_end < n_rows):
            raise ValueError(
                f"trigger ({trigger_start}, {trigger_end}) out of bounds for {n_rows} rows"
            )
        head = fused[trigger_start].expand(n_rows, -1)
        tail = fused[trigger_end].expand(n_rows, -1)
        return self.fusion(torch.cat([fused, head, tail, position_vectors], dim=-1))

    def score(self, conditioned: torch.Tensor) -> RoleScores:
        p_start, p_end = {}, {}
        for role in ROLES:
            p_start[role] = torch.sigmoid(self.start_scorers[role](conditioned).squeeze(-1))
            p_end[role] = torch.sigmoid(self.end_scorers[role](conditioned).squeeze(-1))
        return RoleScores(p_start=p_start, p_end=p_end)


def argument_loss(
    event_scores: list,
    event_labels: list,
    real_mask: torch.Tensor,
) -> torch.Tensor:
    """Mean over events, roles, and real tokens of start BCE plus end BCE.

    `event_scores[k]` is the RoleScores for event k; `event_labels[k]` maps
    each role to a (start_targets, end_targets) tensor pair. Zero events
    yield a zero loss.
    """
    if len(event_scores) != len(event_labels):
        raise ValueError("scores/labels event counts disagree")
    if not event_scores:
        return torch.tensor(0.0)
    mask = real_mask.to(next(iter(event_scores[0].p_start.values())).dtype)
    n = mask.sum().clamp(min=1.0)
    total = 0.0
    for scores, labels in zip(event_scores, event_labels):
        for role in ROLES:
            start_targets, end_targets = labels[role]
            per_token = binary_cross_entropy(
                scores.p_start[role], start_targets
            ) + binary_cross_entropy(scores.p_end[role], end_targets)
            total = total + (per_token * mask).sum() / n
    return total / (len(event_scores) * len(ROLES))


def decode_role_span(
    p_start: np.ndarray,
    p_end: np.ndarray,
    n_tokens: int,
    threshold: float = 0.5,
    max_arg_offset: int = 30,
) -> tuple[int, int] | None:
    """Best (i, j) with i <= j <= i + max_arg_offset maximizing
    p_start[i] * p_end[j], both factors at or above the threshold; None when
    no pair qualifies. Ties break to the lowest i, then the lowest j."""
    best = None
    best_score = -1.0
    for i in range(n_tokens):
        if p_start[i] < threshold:
            continue
        for j in range(i, min(i + max_arg_offset, n_tokens - 1) + 1):
            if p_end[j] < threshold:
                continue
            score = float(p_start[i]) * float(p_end[j])
            if score > best_score:
                best = (i, j)
                best_score = score
    return best


def _as_numpy(values) -> np.ndarray:
    if isinstance(values, torch.Tensor):
        return values.detach().cpu().numpy().astype(np.float64)
    return np.asarray(values, dtype=np.float64)


def decode_arguments(
    scores: RoleScores,
    n_tokens: int,
    threshold: float = 0.5,
    max_arg_offset: int = 30,
) -> dict:
    """Per role, the best-scoring qualifying span or None."""
    return {
        role: decode_role_span(
            _as_numpy(scores.p_start[role]),
            _as_numpy(scores.p_end[role]),
            n_tokens,
            threshold,
            max_arg_offset,
        )
        for role in ROLES
    }

"""Small shared building blocks for the head modules."""

from __future__ import annotations

import torch
from torch import nn

BCE_EPS = 1e-7


class FusionFFN(nn.Module):
    """One-hidden-layer feed-forward fusion: linear, GELU, dropout, linear.

    Hidden width equals the output width.
    """

    def __init__(self, in_dim: int, out_dim: int, dropout: float = 0.1):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.net = nn.Sequential(
            nn.Linear(in_dim, out_dim),
            nn.GELU(),
            nn.Dropout(dropout),
            nn.Linear(out_dim, out_dim),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"expected input width {self.in_dim}, got {x.shape[-1]}")
        return self.net(x)


def binary_cross_entropy(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Per-element BCE with probabilities clamped to [eps, 1-eps]."""
    p = probs.clamp(BCE_EPS, 1.0 - BCE_EPS)
    return -(targets * torch.log(p) + (1.0 - targets) * torch.log(1.0 - p))

"""Event representation by role-aware max-pooling and polarity classification.

The event vector is the coordinate-wise maximum, over real token rows only,
of each token's trigger-conditioned vector concatenated with its argument-role
embedding. A single affine map plus softmax yields the three-way polarity
distribution in the fixed class order positive, negative, neutral.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from eventsent.corpus.data import POLARITIES

N_CLASSES = len(POLARITIES)


class SentimentHead(nn.Module):
    def __init__(self, d_model: int, feat_dim: int = 128):
        super().__init__()
        self.in_dim = d_model + feat_dim
        self.classifier = nn.Linear(self.in_dim, N_CLASSES)

    def event_representation(
        self,
        conditioned: torch.Tensor,
        role_vectors: torch.Tensor,
        real_mask: torch.Tensor,
    ) -> torch.Tensor:
        """Masked coordinate-wise max over real token rows; boundary rows are
        excluded. Gradient at ties routes to the lowest qualifying row."""
        if int(real_mask.sum()) == 0:
            raise ValueError("event representation needs at least one real token")
        stacked = torch.cat([conditioned, role_vectors], dim=-1)
        masked = stacked.masked_fill(~real_mask[:, None], float("-inf"))
        indices = masked.argmax(dim=0)
        return stacked.gather(0, indices[None, :]).squeeze(0)

    def logits(self, event_vector: torch.Tensor) -> torch.Tensor:
        return self.classifier(event_vector)

    def classify(self, event_vector: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.logits(event_vector), dim=-1)


def sentiment_loss(logits_per_event: list, polarity_ids: list) -> torch.Tensor:
    """Mean categorical cross-entropy over the document's events; zero events
    yield a zero loss."""
    if len(logits_per_event) != len(polarity_ids):
        raise ValueError("logits/labels event counts disagree")
    if not logits_per_event:
        return torch.tensor(0.0)
    stacked = torch.stack(logits_per_event)
    targets = torch.tensor(polarity_ids, dtype=torch.long)
    return F.cross_entropy(stacked, targets)

"""Deterministic corpus splitting."""

from __future__ import annotations

import math
import random

from eventsent.corpus.data import Corpus


class SplitConfigError(ValueError):
    pass


def split_sizes(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Largest-remainder apportionment; ties go to the earlier ratio."""
    floors = [math.floor(n * r) for r in ratios]
    remainder = n - sum(floors)
    fracs = sorted(
        range(len(ratios)), key=lambda i: (-(n * ratios[i] - floors[i]), i)
    )
    for i in fracs[:remainder]:
        floors[i] += 1
    return floors


def split_corpus(
    corpus: Corpus, ratios: tuple[float, ...] = (0.8, 0.1, 0.1), seed: int = 0
) -> tuple[Corpus, ...]:
    """Disjoint, exhaustive, deterministic under seed."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitConfigError(f"split ratios must sum to 1, got {sum(ratios)}")
    if any(r < 0 for r in ratios):
        raise SplitConfigError("split ratios must be non-negative")
    order = list(range(len(corpus)))
    random.Random(seed).shuffle(order)
    sizes = split_sizes(len(corpus), tuple(ratios))
    parts = []
    offset = 0
    for size in sizes:
        part_ids = sorted(order[offset : offset + size])
        parts.append([corpus[i] for i in part_ids])
        offset += size
    return tuple(parts)

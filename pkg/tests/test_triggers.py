from __future__ import annotations

import math
import random

import numpy as np
import pytest
import torch

from eventsent.triggers import TriggerHead, TriggerScores, decode_trigger_spans, trigger_loss

from util import oracle_trigger_decode

LN2 = 0.6931471805599453
SIGMOID_10 = 0.9999546021312976


def _zeroed_head(width=4, feat_dim=2):
    head = TriggerHead(width, feat_dim=feat_dim, dropout=0.0).double()
    with torch.no_grad():
        for param in head.parameters():
            param.zero_()
    return head


def _rows(n, width=4, feat_dim=2, seed=0):
    g = torch.Generator().manual_seed(seed)
    return (
        torch.randn(n, width, generator=g, dtype=torch.float64),
        torch.randn(n, feat_dim, generator=g, dtype=torch.float64),
        torch.randn(n, feat_dim, generator=g, dtype=torch.float64),
    )


# ---- scoring ------------------------------------------------------------


def test_zero_parameter_head_scores_half_everywhere():
    head = _zeroed_head()
    fused = head.fuse(*_rows(6))
    scores = head.score(fused)
    assert torch.allclose(scores.p_start, torch.full((6,), 0.5, dtype=torch.float64))
    assert torch.allclose(scores.p_end, torch.full((6,), 0.5, dtype=torch.float64))


def test_start_bias_ten_gives_the_logistic_of_ten():
    head = _zeroed_head()
    with torch.no_grad():
        head.start_scorer.bias.fill_(10.0)
    scores = head.score(head.fuse(*_rows(5)))
    expected = torch.full((5,), SIGMOID_10, dtype=torch.float64)
    assert torch.allclose(scores.p_start, expected, atol=1e-12)
    assert torch.allclose(scores.p_end, torch.full((5,), 0.5, dtype=torch.float64))


def test_fuse_rejects_mismatched_row_counts():
    head = TriggerHead(4, feat_dim=2)
    word, pos, ner = _rows(5)
    with pytest.raises(ValueError):
        head.fuse(word, pos[:4], ner)


# ---- loss ---------------------------------------------------------------


def test_uninformative_scores_cost_two_ln_two():
    n = 7
    scores = TriggerScores(
        p_start=torch.full((n,), 0.5, dtype=torch.float64),
        p_end=torch.full((n,), 0.5, dtype=torch.float64),
    )
    start = torch.zeros(n, dtype=torch.float64)
    start[2] = 1.0
    end = torch.zeros(n, dtype=torch.float64)
    end[3] = 1.0
    mask = torch.tensor([True] * 5 + [False] * 2)
    loss = trigger_loss(scores, start, end, mask)
    assert loss.item() == pytest.approx(2 * LN2, abs=1e-12)
    assert 2 * LN2 == pytest.approx(1.3862943611198906, abs=1e-15)


def test_confident_correct_scores_cost_at_most_the_clamp_floor():
    n = 6
    start = torch.zeros(n, dtype=torch.float64)
    start[1] = 1.0
    end = torch.zeros(n, dtype=torch.float64)
    end[2] = 1.0
    scores = TriggerScores(p_start=start.clone(), p_end=end.clone())
    mask = torch.tensor([True] * 4 + [False] * 2)
    loss = trigger_loss(scores, start, end, mask)
    assert 0.0 < loss.item() <= 2 * (-math.log(1.0 - 1e-7)) + 1e-15


def test_boundary_rows_never_contribute_to_the_loss():
    n = 5
    labels = torch.zeros(n, dtype=torch.float64)
    mask = torch.tensor([True] * 3 + [False] * 2)
    clean = TriggerScores(
        p_start=torch.full((n,), 0.4, dtype=torch.float64),
        p_end=torch.full((n,), 0.4, dtype=torch.float64),
    )
    garbage = TriggerScores(p_start=clean.p_start.clone(), p_end=clean.p_end.clone())
    garbage.p_start[3:] = 0.999
    garbage.p_end[3:] = 0.001
    assert trigger_loss(clean, labels, labels, mask).item() == pytest.approx(
        trigger_loss(garbage, labels, labels, mask).item(), abs=1e-15
    )


def test_loss_is_averaged_over_real_tokens_only():
    n = 4
    scores = TriggerScores(
        p_start=torch.full((n,), 0.5, dtype=torch.float64),
        p_end=torch.full((n,), 0.5, dtype=torch.float64),
    )
    labels = torch.zeros(n, dtype=torch.float64)
    one_real = torch.tensor([True, False, False, False])
    all_real = torch.tensor([True, True, False, False])
    a = trigger_loss(scores, labels, labels, one_real).item()
    b = trigger_loss(scores, labels, labels, all_real).item()
    assert a == pytest.approx(b, abs=1e-12)  # constant scores: mean is flat


# ---- decoding -----------------------------------------------------------


def _probs(n, hot, value=0.9):
    p = np.zeros(n)
    for i in hot:
        p[i] = value
    return p


def test_decode_pairs_each_start_with_nearest_following_end():
    p_start = _probs(12, [2, 7])
    p_end = _probs(12, [3, 8])
    assert decode_trigger_spans(p_start, p_end, 10) == [(2, 3), (7, 8)]


def test_decode_with_everything_below_threshold_finds_nothing():
    p = np.full(8, 0.49)
    assert decode_trigger_spans(p, p, 6, threshold=0.5) == []


def test_decode_start_without_end_falls_back_to_single_token():
    assert decode_trigger_spans(_probs(8, [4]), np.zeros(8), 6) == [(4, 4)]


def test_decode_enforces_the_span_length_cap():
    n = 14
    assert decode_trigger_spans(_probs(n, [0]), _probs(n, [10]), 12) == [(0, 0)]
    assert decode_trigger_spans(_probs(n, [0]), _probs(n, [9]), 12) == [(0, 9)]


def test_decode_never_crosses_the_next_start():
    p_start = _probs(10, [2, 5])
    p_end = _probs(10, [6])
    assert decode_trigger_spans(p_start, p_end, 8) == [(2, 2), (5, 6)]


def test_decode_threshold_is_inclusive():
    p_start = _probs(6, [1], value=0.5)
    p_end = _probs(6, [1], value=0.5)
    assert decode_trigger_spans(p_start, p_end, 4, threshold=0.5) == [(1, 1)]


def test_decode_ignores_rows_past_the_token_count():
    p_start = _probs(7, [1, 5, 6])
    p_end = _probs(7, [2, 5, 6])
    assert decode_trigger_spans(p_start, p_end, 5) == [(1, 2)]


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_decode_rejects_thresholds_outside_the_open_interval(bad):
    with pytest.raises(ValueError):
        decode_trigger_spans(np.zeros(4), np.zeros(4), 2, threshold=bad)


def test_decode_agrees_with_the_naive_oracle_on_random_vectors():
    rng = random.Random(7)
    for trial in range(1000):
        n = rng.randint(0, 12)
        rows = n + 2
        p_start = np.array([rng.random() for _ in range(rows)])
        p_end = np.array([rng.random() for _ in range(rows)])
        threshold = rng.choice([0.35, 0.5, 0.75])
        got = decode_trigger_spans(p_start, p_end, n, threshold=threshold)
        want = oracle_trigger_decode(p_start, p_end, n, threshold=threshold)
        assert got == want, f"trial {trial}: {got} != {want}"

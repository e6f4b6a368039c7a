from __future__ import annotations

import math

import pytest
import torch

from eventsent.layers import BCE_EPS, FusionFFN, binary_cross_entropy


def _set(linear, weight, bias):
    with torch.no_grad():
        linear.weight.copy_(torch.tensor(weight, dtype=linear.weight.dtype))
        linear.bias.copy_(torch.tensor(bias, dtype=linear.bias.dtype))


def test_fusion_hidden_width_equals_output_width():
    ffn = FusionFFN(7, 2)
    assert ffn.net[0].out_features == 2
    assert ffn.net[3].in_features == 2
    assert ffn.net[3].out_features == 2


def test_fusion_two_by_two_worked_example():
    # hand-computed with the exact erf GELU:
    #   z = W1 x + b1 = [1.1, -1.45]
    #   g = gelu(z)   = [0.9507673329589791, -0.1066174264339901]
    #   y = W2 g + b2
    ffn = FusionFFN(2, 2, dropout=0.0).double()
    _set(ffn.net[0], [[1.0, -1.0], [0.5, 2.0]], [0.1, -0.2])
    _set(ffn.net[3], [[2.0, 0.0], [-1.0, 1.0]], [0.0, 0.3])
    y = ffn(torch.tensor([0.3, -0.7], dtype=torch.float64))
    expected = torch.tensor(
        [1.9015346659179582, -0.7573847593929692], dtype=torch.float64
    )
    assert torch.allclose(y, expected, atol=1e-12)


def test_fusion_gelu_is_the_exact_erf_form():
    # recompute the worked example's hidden activation independently
    z = [1.1, -1.45]
    gelu = [v * 0.5 * (1.0 + math.erf(v / math.sqrt(2.0))) for v in z]
    assert gelu[0] == pytest.approx(0.9507673329589791, abs=1e-15)
    assert gelu[1] == pytest.approx(-0.1066174264339901, abs=1e-15)
    module_gelu = torch.nn.GELU()(torch.tensor(z, dtype=torch.float64))
    assert torch.allclose(module_gelu, torch.tensor(gelu, dtype=torch.float64), atol=1e-14)


def test_fusion_with_zero_parameters_outputs_zero():
    ffn = FusionFFN(5, 3, dropout=0.0)
    with torch.no_grad():
        for param in ffn.parameters():
            param.zero_()
    y = ffn(torch.randn(4, 5))
    assert torch.equal(y, torch.zeros(4, 3))


def test_fusion_rejects_mismatched_input_width():
    ffn = FusionFFN(4, 2)
    with pytest.raises(ValueError):
        ffn(torch.randn(3, 3))


def test_bce_at_half_is_ln_two():
    p = torch.tensor([0.5, 0.5], dtype=torch.float64)
    t = torch.tensor([1.0, 0.0], dtype=torch.float64)
    out = binary_cross_entropy(p, t)
    ln2 = 0.6931471805599453
    assert torch.allclose(out, torch.tensor([ln2, ln2], dtype=torch.float64), atol=1e-15)


def test_bce_clamps_certain_wrong_predictions():
    p = torch.tensor([0.0, 1.0], dtype=torch.float64)
    t = torch.tensor([1.0, 0.0], dtype=torch.float64)
    out = binary_cross_entropy(p, t)
    cap = -math.log(BCE_EPS)
    assert cap == pytest.approx(16.11809565095832, abs=1e-12)
    assert torch.allclose(out, torch.full((2,), cap, dtype=torch.float64), atol=1e-12)


def test_bce_on_certain_correct_predictions_is_tiny_but_positive():
    p = torch.tensor([1.0, 0.0], dtype=torch.float64)
    t = torch.tensor([1.0, 0.0], dtype=torch.float64)
    out = binary_cross_entropy(p, t)
    floor = -math.log(1.0 - BCE_EPS)
    assert floor == pytest.approx(1.0000000494736474e-07, rel=1e-12)
    assert torch.allclose(out, torch.full((2,), floor, dtype=torch.float64), rtol=1e-12)
    assert (out > 0).all()


def test_bce_keeps_gradients_finite_at_the_boundaries():
    p = torch.tensor([0.0, 1.0, 0.5], requires_grad=True)
    t = torch.tensor([1.0, 0.0, 1.0])
    binary_cross_entropy(p, t).sum().backward()
    assert torch.isfinite(p.grad).all()

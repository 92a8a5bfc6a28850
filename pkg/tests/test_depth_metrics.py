import numpy as np
import pytest

import depth.metrics
from depth.metrics import combined_loss, depth_l2, grad_loss, ssim, threshold_accuracy
from exceptions import DepthError
from models import DepthMap, LossWeights, SsimParams

SHAPE = (24, 32)


@pytest.fixture()
def gt():
    rng = np.random.default_rng(0)
    return DepthMap.from_array(rng.uniform(1.0, 4.0, SHAPE))


def shifted(depth, offset):
    return DepthMap.from_array(depth.values + offset)


def test_depth_l2(gt):
    assert depth_l2(gt, gt) == 0.0
    assert depth_l2(shifted(gt, 1.0), gt) == pytest.approx(1.0, abs=1e-9)

    half = gt.values.copy()
    half[:, SHAPE[1] // 2:] += 2.0
    assert depth_l2(DepthMap.from_array(half), gt) == pytest.approx(np.sqrt(2.0), abs=1e-9)


def test_depth_l2_needs_jointly_valid_pixels(gt):
    empty = DepthMap.from_array(np.zeros(SHAPE))
    with pytest.raises(DepthError):
        depth_l2(empty, gt)
    with pytest.raises(DepthError):
        depth_l2(DepthMap.from_array(np.ones((5, 5))), gt)


def test_grad_loss(gt):
    assert grad_loss(gt, gt) == 0.0
    assert grad_loss(shifted(gt, 3.0), gt) == pytest.approx(0.0, abs=1e-9)
    ramp = np.arange(SHAPE[1], dtype=np.float64)[None, :]
    assert grad_loss(DepthMap.from_array(gt.values + ramp), gt) == pytest.approx(1.0, abs=1e-9)


def test_grad_loss_skips_pixels_next_to_holes(gt):
    values = gt.values + np.arange(SHAPE[1], dtype=np.float64)[None, :]
    values[5, 5] = 0.0
    # the hole is excluded rather than producing a huge gradient
    assert grad_loss(DepthMap.from_array(values), gt) == pytest.approx(1.0, abs=1e-9)


def test_ssim_self_and_symmetry(gt):
    params = SsimParams(dynamic_range=4.0)
    assert ssim(gt, gt, params) == pytest.approx(1.0, abs=1e-9)
    other = DepthMap.from_array(np.random.default_rng(1).uniform(1.0, 4.0, SHAPE))
    assert ssim(gt, other, params) == pytest.approx(ssim(other, gt, params), abs=1e-12)
    assert -1.0 <= ssim(gt, other, params) <= 1.0


def test_ssim_of_constant_images():
    L = 4.0
    a, b = 2.0, 2.0 + 0.1 * L
    c1 = (0.01 * L) ** 2
    expected = (2 * a * b + c1) / (a * a + b * b + c1)
    value = ssim(DepthMap.from_array(np.full(SHAPE, a)), DepthMap.from_array(np.full(SHAPE, b)),
                 SsimParams(dynamic_range=L))
    assert value == pytest.approx(expected, abs=1e-9)


def test_ssim_rejects_bad_windows(gt):
    with pytest.raises(DepthError):
        ssim(gt, gt, SsimParams(dynamic_range=4.0, window=10))
    with pytest.raises(DepthError):
        ssim(gt, gt, SsimParams(dynamic_range=4.0, window=31))


def test_combined_loss(gt, monkeypatch):
    params = SsimParams(dynamic_range=4.0)
    assert combined_loss(gt, gt, LossWeights(), params) == pytest.approx(0.0, abs=1e-9)

    pred = shifted(gt, 0.5)
    assert combined_loss(pred, gt, LossWeights(1.0, 0.0, 0.0), params) == pytest.approx(depth_l2(pred, gt))

    monkeypatch.setattr(depth.metrics, "ssim", lambda *args: -1.0)
    assert combined_loss(pred, gt, LossWeights(0.0, 0.0, 1.0), params) == pytest.approx(1.0)


def test_combined_loss_needs_ssim_parameters(gt):
    with pytest.raises(TypeError):
        combined_loss(gt, gt, LossWeights())


def test_combined_loss_is_linear_in_weights(gt):
    params = SsimParams(dynamic_range=4.0)
    pred = DepthMap.from_array(gt.values * 1.1)
    base = combined_loss(pred, gt, LossWeights(0.1, 1.0, 1.0), params)
    doubled = combined_loss(pred, gt, LossWeights(0.2, 1.0, 1.0), params)
    assert doubled - base == pytest.approx(0.1 * depth_l2(pred, gt), abs=1e-9)


def test_threshold_accuracy(gt):
    assert threshold_accuracy(gt, gt) == 1.0
    assert threshold_accuracy(DepthMap.from_array(gt.values * 1.3), gt) == 0.0

    half = gt.values.copy()
    half[: SHAPE[0] // 2] *= 2.0
    assert threshold_accuracy(DepthMap.from_array(half), gt, 1.25) == pytest.approx(0.5)


def test_threshold_accuracy_is_monotone(gt):
    pred = DepthMap.from_array(gt.values * np.random.default_rng(2).uniform(0.5, 2.0, SHAPE))
    scores = [threshold_accuracy(pred, gt, t) for t in (1.05, 1.25, 1.5, 2.0, 3.0)]
    assert scores == sorted(scores)
    with pytest.raises(DepthError):
        threshold_accuracy(pred, gt, 1.0)

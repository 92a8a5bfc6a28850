import math

import numpy as np
import pytest

from exceptions import LocalizationError
from localization.path_loss import D_MIN, expected_rssi, rssi_at_distance, rssi_jacobian, rssi_to_distance
from models import Beacon, PathLossParams, Pose2

DEFAULT = PathLossParams()


def test_reference_distance():
    assert rssi_to_distance(-59.0, DEFAULT) == pytest.approx(1.0)


def test_one_decade():
    assert rssi_to_distance(-79.0, PathLossParams(-59.0, 2.0, 1.0)) == pytest.approx(10.0)


def test_non_finite_rssi():
    with pytest.raises(LocalizationError):
        rssi_to_distance(float("nan"), DEFAULT)


def test_inverse_pair_over_range():
    rng = np.random.default_rng(0)
    for d in rng.uniform(D_MIN, 50.0, 1000):
        pl = PathLossParams(rng.uniform(-80, -40), rng.uniform(1.5, 4.0), rng.uniform(0.5, 2.0))
        assert rssi_to_distance(rssi_at_distance(d, pl), pl) == pytest.approx(d, rel=1e-9)


def test_expected_rssi_examples():
    beacon = Beacon("b", np.array([2.0, 3.0, 1.3]))
    assert expected_rssi(Pose2(2.0, 3.0, 0.7), beacon, 0.3) == pytest.approx(-59.0)

    far = Beacon("f", np.array([10.0, 0.0, 0.3]))
    assert expected_rssi(Pose2(), far, 0.3) == pytest.approx(-79.0)


def test_expected_rssi_is_clamped_near_the_beacon():
    beacon = Beacon("b", np.array([0.0, 0.0, 0.32]))
    assert expected_rssi(Pose2(), beacon, 0.3) == pytest.approx(rssi_at_distance(D_MIN, DEFAULT))
    np.testing.assert_array_equal(rssi_jacobian(Pose2(), beacon, 0.3), np.zeros(3))


def test_jacobian_matches_finite_differences():
    beacon = Beacon("b", np.array([4.0, -1.0, 2.5]))
    pose = Pose2(1.0, 2.0, 0.3)
    h = 1e-6
    numeric = [
        (expected_rssi(Pose2(pose.x + h, pose.y, pose.theta), beacon, 0.3)
         - expected_rssi(Pose2(pose.x - h, pose.y, pose.theta), beacon, 0.3)) / (2 * h),
        (expected_rssi(Pose2(pose.x, pose.y + h, pose.theta), beacon, 0.3)
         - expected_rssi(Pose2(pose.x, pose.y - h, pose.theta), beacon, 0.3)) / (2 * h),
        0.0,
    ]
    np.testing.assert_allclose(rssi_jacobian(pose, beacon, 0.3), numeric, atol=1e-6)
    assert math.isclose(numeric[0], rssi_jacobian(pose, beacon, 0.3)[0], rel_tol=1e-5)

import math

import pytest

from exceptions import SimulationError
from models import Pose2, StampedPose
from simulation.evaluation import pose_rmse


def track(poses, dt=0.5):
    return [StampedPose(k * dt, p) for k, p in enumerate(poses)]


def test_identical_tracks_score_zero():
    truth = track([Pose2(k * 0.1, 1.0, 0.2 * k) for k in range(10)])
    assert pose_rmse(truth, truth) == {"rmse_xy_m": 0.0, "rmse_theta_rad": 0.0, "max_xy_m": 0.0}


def test_constant_offset():
    truth = track([Pose2(k, 0.0, 0.0) for k in range(5)])
    shifted = track([Pose2(k, 1.0, 0.0) for k in range(5)])
    result = pose_rmse(shifted, truth)
    assert result["rmse_xy_m"] == pytest.approx(1.0)
    assert result["max_xy_m"] == pytest.approx(1.0)
    assert result["rmse_theta_rad"] == 0.0


def test_heading_error_is_wrapped():
    truth = track([Pose2(0.0, 0.0, math.pi)])
    est = [StampedPose(0.0, Pose2(0.0, 0.0, -math.pi + 1e-12))]
    assert pose_rmse(est, truth)["rmse_theta_rad"] == pytest.approx(0.0, abs=1e-9)


def test_truth_is_interpolated_between_samples():
    truth = track([Pose2(0.0, 0.0, 0.0), Pose2(1.0, 0.0, 0.0)], dt=1.0)
    est = [StampedPose(0.5, Pose2(0.5, 0.0, 0.0))]
    assert pose_rmse(est, truth)["rmse_xy_m"] == pytest.approx(0.0, abs=1e-12)


def test_estimates_outside_the_truth_span_are_skipped():
    truth = track([Pose2(0.0, 0.0, 0.0), Pose2(1.0, 0.0, 0.0)], dt=1.0)
    est = [StampedPose(1.0, Pose2(1.0, 0.0, 0.0)), StampedPose(5.0, Pose2(9.0, 9.0, 0.0))]
    assert pose_rmse(est, truth)["max_xy_m"] == 0.0


def test_no_overlap_is_an_error():
    truth = track([Pose2(0.0, 0.0, 0.0)])
    with pytest.raises(SimulationError):
        pose_rmse([StampedPose(3.0, Pose2())], truth)

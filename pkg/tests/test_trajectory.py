import math

import pytest

from exceptions import ConfigError, SimulationError
from models import Pose2, StampedPose, TrajectorySpec
from simulation.trajectory import Trajectory, interpolate_pose, sample_trajectory

SQUARE = ((0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (0.0, 0.0))


def test_straight_line_sampling():
    samples = sample_trajectory(TrajectorySpec(((0.0, 0.0), (10.0, 0.0)), speed=1.0), dt=1.0)
    assert len(samples) == 11
    assert [s.timestamp for s in samples] == [float(k) for k in range(11)]
    for k, s in enumerate(samples):
        assert s.pose.x == pytest.approx(k)
        assert s.pose.y == 0.0
        assert s.pose.theta == 0.0


def test_initial_heading_follows_first_segment():
    traj = Trajectory(TrajectorySpec(((1.0, 1.0), (1.0, 4.0)), speed=0.5))
    assert traj.start_heading == pytest.approx(math.pi / 2)
    assert traj.pose_at(0.0) == Pose2(1.0, 1.0, math.pi / 2)
    assert traj.duration == pytest.approx(6.0)


def test_closed_loop_ends_at_start_heading():
    spec = TrajectorySpec(SQUARE, speed=1.0, turn_rate=math.pi / 2)
    traj = Trajectory(spec)
    # four legs of 2 s and four quarter turns of 1 s, the last one closing the loop
    assert traj.duration == pytest.approx(12.0)
    end = traj.end_pose
    assert (end.x, end.y) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert end.theta == pytest.approx(traj.start_heading, abs=1e-12)


def test_turns_happen_in_place():
    traj = Trajectory(TrajectorySpec(SQUARE, speed=1.0, turn_rate=math.pi / 2))
    mid_turn = traj.pose_at(2.5)
    assert (mid_turn.x, mid_turn.y) == pytest.approx((2.0, 0.0))
    assert mid_turn.theta == pytest.approx(math.pi / 4)
    after = traj.pose_at(4.0)
    assert (after.x, after.y) == pytest.approx((2.0, 1.0))
    assert after.theta == pytest.approx(math.pi / 2)


def test_robot_holds_the_final_pose():
    traj = Trajectory(TrajectorySpec(((0.0, 0.0), (1.0, 0.0)), speed=1.0))
    assert traj.pose_at(50.0) == traj.end_pose == Pose2(1.0, 0.0, 0.0)


def test_negative_time_is_rejected():
    traj = Trajectory(TrajectorySpec(((0.0, 0.0), (1.0, 0.0)), speed=1.0))
    with pytest.raises(SimulationError):
        traj.pose_at(-0.1)


def test_repeated_waypoint_is_a_config_error():
    with pytest.raises(ConfigError, match="coincide"):
        Trajectory(TrajectorySpec(((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (2.0, 0.0)), speed=1.0))


def test_nonpositive_dt_is_rejected():
    with pytest.raises(SimulationError):
        sample_trajectory(TrajectorySpec(((0.0, 0.0), (1.0, 0.0)), speed=1.0), dt=0.0)


def test_interpolate_pose():
    samples = [
        StampedPose(0.0, Pose2(0.0, 0.0, 3.0)),
        StampedPose(1.0, Pose2(2.0, 4.0, -3.0)),
    ]
    assert interpolate_pose(samples, 0.0) == samples[0].pose
    assert interpolate_pose(samples, 1.0) == samples[1].pose
    mid = interpolate_pose(samples, 0.5)
    assert (mid.x, mid.y) == pytest.approx((1.0, 2.0))
    # across the +-pi seam the short way round, not through zero
    assert abs(mid.theta) == pytest.approx(math.pi, abs=1e-9)
    assert interpolate_pose(samples, -0.1) is None
    assert interpolate_pose(samples, 1.1) is None
    assert interpolate_pose([], 0.0) is None

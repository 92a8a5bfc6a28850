"""Waypoint following: turn in place, then drive straight at constant speed."""
import bisect
import math
from typing import NamedTuple

import numpy as np

from exceptions import ConfigError, SimulationError
from geometry.angles import wrap_angle
from models import Pose2, StampedPose

COINCIDENT_M = 1e-9


class _Phase(NamedTuple):
    start_time: float
    duration: float
    start: Pose2
    # turn: signed heading change; move: distance travelled
    turn: float
    distance: float


class Trajectory:
    """Continuous-time ground truth for a TrajectorySpec.

    The initial heading points along the first segment. A closed loop (last
    waypoint on the first) finishes with a turn back to that heading. After the
    last phase the robot stays put.
    """

    def __init__(self, spec):
        self.spec = spec
        self._phases = []
        self._elapsed = 0.0

        points = spec.waypoints
        for i, (a, b) in enumerate(zip(points, points[1:])):
            if math.hypot(b[0] - a[0], b[1] - a[1]) < COINCIDENT_M:
                raise ConfigError(f"trajectory waypoints {i} and {i + 1} coincide")

        heading = math.atan2(points[1][1] - points[0][1], points[1][0] - points[0][0])
        self.start_heading = heading
        pose = Pose2(points[0][0], points[0][1], heading)
        for a, b in zip(points, points[1:]):
            target = math.atan2(b[1] - a[1], b[0] - a[0])
            pose = self._turn(pose, target)
            pose = self._move(pose, math.hypot(b[0] - a[0], b[1] - a[1]))
        if math.hypot(points[-1][0] - points[0][0], points[-1][1] - points[0][1]) < COINCIDENT_M:
            pose = self._turn(pose, self.start_heading)
        self.end_pose = pose
        self._starts = [phase.start_time for phase in self._phases]

    @property
    def duration(self):
        return self._elapsed

    def _push(self, start, turn, distance, duration):
        self._phases.append(_Phase(self._elapsed, duration, start, turn, distance))
        self._elapsed += duration

    def _turn(self, pose, target):
        turn = wrap_angle(target - pose.theta)
        if turn == 0.0:
            return pose
        self._push(pose, turn, 0.0, abs(turn) / self.spec.turn_rate)
        return Pose2(pose.x, pose.y, pose.theta + turn)

    def _move(self, pose, distance):
        self._push(pose, 0.0, distance, distance / self.spec.speed)
        return Pose2(pose.x + distance * math.cos(pose.theta),
                     pose.y + distance * math.sin(pose.theta), pose.theta)

    def pose_at(self, t):
        if t < 0:
            raise SimulationError(f"trajectory time must be nonnegative, got {t}")
        if t >= self._elapsed:
            return self.end_pose
        phase = self._phases[bisect.bisect_right(self._starts, t) - 1]
        frac = (t - phase.start_time) / phase.duration
        start = phase.start
        if phase.distance:
            step = frac * phase.distance
            return Pose2(start.x + step * math.cos(start.theta),
                         start.y + step * math.sin(start.theta), start.theta)
        return Pose2(start.x, start.y, start.theta + frac * phase.turn)


def sample_trajectory(spec, dt):
    """Ground-truth poses every `dt` seconds from t = 0 to the end of the path."""
    if not dt > 0:
        raise SimulationError("dt must be positive")
    trajectory = Trajectory(spec)
    steps = int(math.floor(trajectory.duration / dt + 1e-9))
    return [StampedPose(k * dt, trajectory.pose_at(k * dt)) for k in range(steps + 1)]


def interpolate_pose(samples, t, times=None):
    """Pose at `t` from time-sorted samples: exact match, else linear between
    neighbours (heading along the shorter arc). None outside the sampled span."""
    if not samples:
        return None
    if times is None:
        times = np.array([s.timestamp for s in samples])
    i = int(np.searchsorted(times, t))
    if i < len(samples) and times[i] == t:
        return samples[i].pose
    if i == 0 or i == len(samples):
        return None
    a, b = samples[i - 1], samples[i]
    w = (t - a.timestamp) / (b.timestamp - a.timestamp)
    return Pose2(
        a.pose.x + w * (b.pose.x - a.pose.x),
        a.pose.y + w * (b.pose.y - a.pose.y),
        a.pose.theta + w * wrap_angle(b.pose.theta - a.pose.theta),
    )

import math

import numpy as np
from scipy.spatial.transform import Rotation

from geometry.angles import wrap_angle
from models import Pose2, RigidTransform3

# camera frame: x right, y down, z forward; robot base: x forward, y left, z up
CAMERA_TO_BASE = np.array([
    [0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0],
    [0.0, -1.0, 0.0],
])


def compose(a, b):
    """a ⊕ b: pose b, expressed in a's frame, mapped to the world."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    return Pose2(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        a.theta + b.theta,
    )


def invert(p):
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Pose2(
        -(c * p.x + s * p.y),
        -(-s * p.x + c * p.y),
        -p.theta,
    )


def planar_rotation(theta):
    return Rotation.from_euler("z", theta).as_matrix()


def pose2_to_transform3(p, mount):
    """World-from-sensor transform for a planar pose and a fixed sensor mount."""
    base = RigidTransform3(planar_rotation(p.theta), np.array([p.x, p.y, 0.0]))
    return base @ mount


def transform3_to_pose2(transform, mount):
    """Planar pose of the base that carries `mount` to `transform` (yaw only)."""
    base = transform @ mount.inverse()
    r = base.rotation
    return Pose2(base.translation[0], base.translation[1], math.atan2(r[1, 0], r[0, 0]))


def camera_mount(height, pitch=0.0, forward=0.0):
    """Forward-looking camera `height` metres above the floor, tilted down by `pitch` radians."""
    tilt = Rotation.from_euler("y", pitch).as_matrix()
    return RigidTransform3(tilt @ CAMERA_TO_BASE, np.array([forward, 0.0, height]))


def rotation_angle(rotation):
    """Magnitude, in radians, of the rotation encoded by a 3x3 matrix."""
    return float(np.linalg.norm(Rotation.from_matrix(rotation).as_rotvec()))


__all__ = [
    "compose", "invert", "pose2_to_transform3", "transform3_to_pose2",
    "camera_mount", "planar_rotation", "rotation_angle", "wrap_angle",
]

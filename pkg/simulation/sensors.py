"""Forward noise models for the simulated sensors.

Each function draws the same number of variates whatever its noise level, so
a channel's random stream stays aligned when a sigma is set to zero.
"""
import math

import numpy as np

from geometry.angles import wrap_angle
from localization.ekf import predicted_bearing
from localization.path_loss import expected_rssi
from models import BearingObservation, DepthMap, OdometryDelta, RssiObservation

# below this a motion counts as a pure rotation
STATIONARY_M = 1e-9


def simulate_rssi(pose, beacon, receiver_height, rng, timestamp=0.0):
    noise = rng.normal(0.0, beacon.path_loss.sigma_sh)
    return RssiObservation(beacon.id, expected_rssi(pose, beacon, receiver_height) + noise, timestamp)


def simulate_bearing(pose, beacon, sigma, rng, timestamp=0.0):
    noise = rng.normal(0.0, sigma)
    return BearingObservation(beacon.id, predicted_bearing(pose, beacon) + noise, timestamp, sigma)


def decompose_motion(prev, curr):
    """Exact (d_rot1, d_trans, d_rot2) taking `prev` to `curr`."""
    dx, dy = curr.x - prev.x, curr.y - prev.y
    d_trans = math.hypot(dx, dy)
    d_rot1 = wrap_angle(math.atan2(dy, dx) - prev.theta) if d_trans > STATIONARY_M else 0.0
    d_rot2 = wrap_angle(curr.theta - prev.theta - d_rot1)
    return d_rot1, d_trans, d_rot2


def simulate_odometry(prev, curr, alphas, rng, timestamp=0.0):
    r1, t, r2 = decompose_motion(prev, curr)
    a1, a2, a3, a4 = alphas
    sd = np.sqrt([
        a1 * r1 ** 2 + a2 * t ** 2,
        a3 * t ** 2 + a4 * (r1 ** 2 + r2 ** 2),
        a1 * r2 ** 2 + a2 * t ** 2,
    ])
    z = rng.standard_normal(3)
    return OdometryDelta(r1 + sd[0] * z[0], t + sd[1] * z[1], r2 + sd[2] * z[2], timestamp)


def corrupt_depth(depth, sigma_rel, quantize_mm, rng, max_depth=None):
    """Multiplicative Gaussian depth noise, optionally rounded to whole millimetres."""
    z = rng.standard_normal(depth.values.shape)
    noisy = depth.values * (1.0 + sigma_rel * z)
    if quantize_mm:
        noisy = np.round(noisy * 1000.0) / 1000.0
    valid = depth.valid & (noisy > 0)
    if max_depth is not None:
        valid &= noisy <= max_depth
    return DepthMap(np.where(valid, noisy, 0.0), valid)

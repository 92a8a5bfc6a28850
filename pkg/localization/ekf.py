"""Planar EKF: odometry prediction, RSSI (dBm-domain) and bearing updates."""
import logging
import math

import numpy as np

from exceptions import LocalizationError, UnknownBeaconError
from geometry.angles import wrap_angle
from localization.path_loss import expected_rssi, rssi_jacobian
from models import Covariance3, EkfState, Pose2, StampedPose

logger = logging.getLogger(__name__)

DEFAULT_GATE_CHI2 = 6.63
COINCIDENT_M = 1e-6


def _symmetrize(p):
    return 0.5 * (p + p.T)


def initial_state(pose, variances, timestamp=0.0):
    return EkfState(pose, Covariance3.diag(variances), timestamp)


def _motion(pose, d_rot1, d_trans, d_rot2):
    heading = pose.theta + d_rot1
    return Pose2(
        pose.x + d_trans * math.cos(heading),
        pose.y + d_trans * math.sin(heading),
        heading + d_rot2,
    )


def ekf_predict(state, odo, noise):
    if odo.timestamp < state.last_update:
        raise LocalizationError(
            f"odometry at {odo.timestamp} precedes the filter time {state.last_update}"
        )
    r1, t, r2 = odo.d_rot1, odo.d_trans, odo.d_rot2
    heading = state.mean.theta + r1
    c, s = math.cos(heading), math.sin(heading)

    g = np.array([
        [1.0, 0.0, -t * s],
        [0.0, 1.0, t * c],
        [0.0, 0.0, 1.0],
    ])
    v = np.array([
        [-t * s, c, 0.0],
        [t * c, s, 0.0],
        [1.0, 0.0, 1.0],
    ])
    a1, a2, a3, a4 = noise.alphas
    m = np.diag([
        a1 * r1 ** 2 + a2 * t ** 2,
        a3 * t ** 2 + a4 * (r1 ** 2 + r2 ** 2),
        a1 * r2 ** 2 + a2 * t ** 2,
    ])
    p = state.cov.matrix
    cov = _symmetrize(g @ p @ g.T + v @ m @ v.T)
    return EkfState(_motion(state.mean, r1, t, r2), Covariance3(cov), odo.timestamp)


def _scalar_update(state, innovation, h, variance, gate_chi2, timestamp):
    """Joseph-form update for a scalar measurement. Returns (state, gated)."""
    p = state.cov.matrix
    s = float(h @ p @ h) + variance
    if not s > 0 or innovation ** 2 / s > gate_chi2:
        return state, True

    k = p @ h / s
    mean = state.mean.as_array() + k * innovation
    ikh = np.eye(3) - np.outer(k, h)
    cov = _symmetrize(ikh @ p @ ikh.T + variance * np.outer(k, k))
    return EkfState(Pose2(*mean), Covariance3(cov), max(state.last_update, timestamp)), False


def _check_beacon(obs, beacon):
    if beacon is None or beacon.id != obs.beacon_id:
        raise UnknownBeaconError(obs.beacon_id)


def ekf_update_rssi(state, obs, beacon, receiver_height, gate_chi2=DEFAULT_GATE_CHI2):
    _check_beacon(obs, beacon)
    innovation = obs.rssi - expected_rssi(state.mean, beacon, receiver_height)
    h = rssi_jacobian(state.mean, beacon, receiver_height)
    return _scalar_update(state, innovation, h, beacon.path_loss.sigma_sh ** 2,
                          gate_chi2, obs.timestamp)


def predicted_bearing(pose, beacon):
    qx, qy = beacon.position[0] - pose.x, beacon.position[1] - pose.y
    return wrap_angle(math.atan2(qy, qx) - pose.theta)


def ekf_update_bearing(state, obs, beacon, gate_chi2=DEFAULT_GATE_CHI2):
    _check_beacon(obs, beacon)
    qx = beacon.position[0] - state.mean.x
    qy = beacon.position[1] - state.mean.y
    q2 = qx * qx + qy * qy
    if math.sqrt(q2) < COINCIDENT_M:
        return state, True

    innovation = wrap_angle(obs.bearing - predicted_bearing(state.mean, beacon))
    h = np.array([qy / q2, -qx / q2, -1.0])
    return _scalar_update(state, innovation, h, obs.sigma ** 2, gate_chi2, obs.timestamp)


def integrate_odometry(start, deltas):
    """Dead-reckoning: chain odometry increments from `start` with no corrections."""
    pose = start.pose
    track = [start]
    for odo in deltas:
        pose = _motion(pose, odo.d_rot1, odo.d_trans, odo.d_rot2)
        track.append(StampedPose(odo.timestamp, pose))
    return track

import math

import numpy as np

from exceptions import LocalizationError

# receiver-to-beacon distances are clamped to this before taking the log
D_MIN = 0.1
DB_PER_DECADE = 10.0 / math.log(10.0)


def rssi_to_distance(rssi, pl):
    """Log-distance path loss inverted: d = d0 * 10^((p0 - rssi) / (10 n))."""
    if not math.isfinite(rssi):
        raise LocalizationError(f"rssi must be finite, got {rssi}")
    return pl.d0 * 10.0 ** ((pl.p0_dbm - rssi) / (10.0 * pl.n))


def rssi_at_distance(d, pl):
    d = max(float(d), D_MIN)
    return pl.p0_dbm - 10.0 * pl.n * math.log10(d / pl.d0)


def receiver_offset(pose, beacon, receiver_height):
    """Vector from the beacon to the receiver point (x, y, receiver_height)."""
    return np.array([pose.x, pose.y, receiver_height]) - beacon.position


def expected_rssi(pose, beacon, receiver_height):
    d = float(np.linalg.norm(receiver_offset(pose, beacon, receiver_height)))
    return rssi_at_distance(d, beacon.path_loss)


def rssi_jacobian(pose, beacon, receiver_height):
    """d(expected_rssi)/d(x, y, theta); zero inside the D_MIN clamp."""
    offset = receiver_offset(pose, beacon, receiver_height)
    d2 = float(offset @ offset)
    if d2 < D_MIN ** 2:
        return np.zeros(3)
    scale = -beacon.path_loss.n * DB_PER_DECADE / d2
    return np.array([scale * offset[0], scale * offset[1], 0.0])

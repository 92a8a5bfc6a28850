import math

import numpy as np

from exceptions import SimulationError
from geometry.angles import wrap_angles
from simulation.trajectory import interpolate_pose


def pose_rmse(estimated, truth):
    """Position and heading RMSE of `estimated` against `truth`.

    Truth is looked up at each estimate's timestamp, interpolated between
    neighbouring truth samples when there is no exact match. Estimates outside
    the truth's time span are skipped.
    """
    truth = sorted(truth, key=lambda s: s.timestamp)
    times = np.array([s.timestamp for s in truth])
    xy, dtheta = [], []
    for est in estimated:
        ref = interpolate_pose(truth, est.timestamp, times)
        if ref is None:
            continue
        xy.append(math.hypot(est.pose.x - ref.x, est.pose.y - ref.y))
        dtheta.append(est.pose.theta - ref.theta)
    if not xy:
        raise SimulationError("no estimate timestamps fall within the truth trajectory")
    xy, theta = np.array(xy), wrap_angles(dtheta)
    return {
        "rmse_xy_m": float(np.sqrt(np.mean(xy ** 2))),
        "rmse_theta_rad": float(np.sqrt(np.mean(theta ** 2))),
        "max_xy_m": float(xy.max()),
    }

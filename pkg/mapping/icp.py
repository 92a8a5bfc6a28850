"""Point-to-point ICP with closed-form rigid alignment."""
import logging
import math

import numpy as np
from scipy.spatial import cKDTree

from exceptions import CorrespondenceError, MappingError
from models import IcpParams, IcpResult, RigidTransform3

logger = logging.getLogger(__name__)


def best_fit_transform(source, target):
    """Least-squares rigid transform taking `source` points onto paired `target` points."""
    centroid_s = source.mean(axis=0)
    centroid_t = target.mean(axis=0)
    h = (source - centroid_s).T @ (target - centroid_t)
    u, _, vt = np.linalg.svd(h)
    d = 1.0 if np.linalg.det(vt.T @ u.T) >= 0 else -1.0
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidTransform3(rotation, centroid_t - rotation @ centroid_s)


def icp_register(source, target, initial=None, params=IcpParams(), tree=None):
    """Align `source` to `target` starting from `initial`.

    The tracked error is a truncated RMSE over all source points: a point
    with no neighbour inside max_correspondence_m counts as that distance.
    It never increases from one iteration to the next.
    """
    if len(source) < 3 or len(target) < 3:
        raise MappingError("ICP needs at least 3 points in each cloud")
    initial = initial or RigidTransform3.identity()
    tree = tree if tree is not None else cKDTree(target.points)
    src = source.points
    cap = params.max_correspondence_m

    current = initial
    history = []
    converged = False
    inlier_rmse, matched = 0.0, 0
    for iteration in range(1, params.max_iterations + 1):
        moved = current.apply(src)
        dist, idx = tree.query(moved, distance_upper_bound=cap, workers=-1)
        inliers = np.isfinite(dist)
        matched = int(inliers.sum())
        if matched < params.min_correspondences:
            raise CorrespondenceError(
                f"ICP iteration {iteration}: {matched} correspondences, "
                f"need {params.min_correspondences}"
            )
        truncated = np.where(inliers, dist, cap)
        rmse = math.sqrt(float(np.mean(truncated ** 2)))
        inlier_rmse = math.sqrt(float(np.mean(dist[inliers] ** 2)))
        history.append(rmse)
        logger.debug("icp iteration %d rmse=%.6f matched=%d", iteration, rmse, matched)

        if len(history) > 1 and abs(history[-2] - rmse) < params.convergence_eps:
            converged = True
            break
        if iteration == params.max_iterations:
            break
        delta = best_fit_transform(moved[inliers], target.points[idx[inliers]])
        current = delta @ current

    return IcpResult(
        transform=current,
        rmse=history[-1],
        iterations=len(history),
        converged=converged,
        correspondences=matched,
        inlier_rmse=inlier_rmse,
        history=tuple(history),
    )

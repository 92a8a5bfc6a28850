"""Depth map → point cloud → floor plane → height map."""
import logging
from typing import NamedTuple

import numpy as np

from exceptions import DepthError
from models import HeightMap, Plane, PointCloud, RansacParams

logger = logging.getLogger(__name__)


class Projection(NamedTuple):
    u: float
    v: float
    z: float
    in_frame: bool


def _pixel_grid(intr):
    v, u = np.mgrid[0:intr.height, 0:intr.width]
    return u, v


def back_project(depth, intr, color=None):
    """Lift every valid depth pixel to a camera-frame point."""
    depth.check_intrinsics(intr)
    if color is not None and (color.height, color.width) != (depth.height, depth.width):
        raise DepthError("color image and depth map differ in size")

    v, u = np.nonzero(depth.valid)
    z = depth.values[v, u]
    points = np.column_stack([
        (u - intr.cx) * z / intr.fx,
        (v - intr.cy) * z / intr.fy,
        z,
    ])
    colors = color.rgb[v, u] if color is not None else None
    return PointCloud(points, colors, np.column_stack([u, v]))


def project_points(points, intr):
    """Vectorized pinhole projection; returns (uv, z, in_frame)."""
    points = np.reshape(np.asarray(points, dtype=np.float64), (-1, 3))
    z = points[:, 2]
    if np.any(z <= 0):
        raise DepthError("cannot project points at or behind the camera")
    u = intr.fx * points[:, 0] / z + intr.cx
    v = intr.fy * points[:, 1] / z + intr.cy
    # pixel centres sit on integer coordinates
    in_frame = (u >= -0.5) & (u < intr.width - 0.5) & (v >= -0.5) & (v < intr.height - 0.5)
    return np.column_stack([u, v]), z, in_frame


def project(point, intr):
    uv, z, in_frame = project_points(point, intr)
    return Projection(float(uv[0, 0]), float(uv[0, 1]), float(z[0]), bool(in_frame[0]))


def _floor_candidates(cloud, bottom_fraction, image_height=None):
    if cloud.pixels is not None:
        rows = cloud.pixels[:, 1]
        height = image_height if image_height is not None else int(rows.max()) + 1
        return cloud.points[rows >= (1.0 - bottom_fraction) * height]
    # pixel-less clouds are taken to be z-up
    count = int(np.ceil(bottom_fraction * len(cloud)))
    order = np.argsort(cloud.points[:, 2], kind="stable")
    return cloud.points[order[:count]]


def _least_squares_plane(points):
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    normal = vt[-1]
    return normal / np.linalg.norm(normal), centroid


def fit_floor_plane(cloud, params=RansacParams(), rng=None, viewpoint=None, image_height=None):
    """RANSAC over the bottom of the image, refined by least squares over the inliers.

    The returned normal points towards `viewpoint` (camera origin by default).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    viewpoint = np.zeros(3) if viewpoint is None else np.asarray(viewpoint, dtype=np.float64)

    candidates = _floor_candidates(cloud, params.bottom_fraction, image_height) if len(cloud) else cloud.points
    if len(candidates) < 3:
        raise DepthError("no floor found: fewer than 3 candidate points")

    best_count, best_model = 0, None
    for _ in range(params.iterations):
        a, b, c = candidates[rng.choice(len(candidates), size=3, replace=False)]
        normal = np.cross(b - a, c - a)
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue
        normal /= norm
        mask = np.abs((candidates - a) @ normal) <= params.inlier_threshold_m
        count = int(mask.sum())
        if count > best_count:
            best_count, best_model = count, (a, normal)

    if best_count < max(params.min_inliers, 3):
        raise DepthError(f"no floor found: {best_count} inliers, need {params.min_inliers}")

    # refine over every point of the cloud that supports the winning hypothesis
    a, normal = best_model
    support = cloud.points[np.abs((cloud.points - a) @ normal) <= params.inlier_threshold_m]
    normal, centroid = _least_squares_plane(support)
    offset = -float(normal @ centroid)
    if normal @ viewpoint + offset < 0:
        normal, offset = -normal, -offset
    logger.debug("floor plane normal=%s offset=%.4f inliers=%d", normal, offset, best_count)
    return Plane(normal, offset)


def height_map(depth, intr, floor):
    """Signed distance of every valid pixel's point to the floor; negatives are kept."""
    depth.check_intrinsics(intr)
    u, v = _pixel_grid(intr)
    z = depth.values
    points = np.stack([(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z], axis=-1)
    heights = np.where(depth.valid, floor.signed_distance(points), 0.0)
    return HeightMap(heights, depth.valid.copy())

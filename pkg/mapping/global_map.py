"""Voxel-centroid global map and EKF-seeded scan insertion."""
import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from exceptions import CorrespondenceError, MappingError
from geometry.transforms import pose2_to_transform3
from mapping.icp import icp_register
from mapping.voxel import accumulate, unpack_keys
from models import IcpParams, IcpResult, PointCloud, RigidTransform3

logger = logging.getLogger(__name__)


class GlobalMap:
    """Occupied voxels keyed by packed integer index, each with a point sum and count.

    Single writer: scans are inserted in timestamp order by one owner.
    """

    def __init__(self, voxel_size=0.05):
        if not voxel_size > 0:
            raise MappingError("voxel_size must be positive")
        self.voxel_size = float(voxel_size)
        self._keys = np.zeros(0, dtype=np.int64)
        self._sums = np.zeros((0, 3))
        self._counts = np.zeros(0, dtype=np.int64)

    def __len__(self):
        return len(self._keys)

    @property
    def counts(self):
        return self._counts.copy()

    def points(self):
        """Representative points (voxel centroids), sorted by voxel index."""
        return self._sums / self._counts[:, None]

    def voxel_indices(self):
        return unpack_keys(self._keys)

    def as_cloud(self):
        return PointCloud(self.points())

    def insert_points(self, points):
        points = np.reshape(np.asarray(points, dtype=np.float64), (-1, 3))
        if not len(points):
            return self
        keys, sums, counts = accumulate(points, self.voxel_size)
        merged, inverse = np.unique(np.concatenate([self._keys, keys]), return_inverse=True)
        inverse = inverse.ravel()
        all_sums = np.concatenate([self._sums, sums])
        self._sums = np.column_stack([
            np.bincount(inverse, weights=all_sums[:, axis], minlength=len(merged))
            for axis in range(3)
        ])
        self._counts = np.bincount(
            inverse, weights=np.concatenate([self._counts, counts]), minlength=len(merged)
        ).astype(np.int64)
        self._keys = merged
        return self

    def neighborhood(self, points, margin):
        """Representative points inside the bounding box of `points` grown by `margin`."""
        reps = self.points()
        lo = points.min(axis=0) - margin
        hi = points.max(axis=0) + margin
        return reps[np.all((reps >= lo) & (reps <= hi), axis=1)]

    def top_view(self, cell_m):
        """Bird's-eye occupancy: (counts per (row=y, col=x) cell, (xmin, ymin) origin)."""
        reps = self.points()
        if not len(reps):
            return np.zeros((0, 0), dtype=np.int64), (0.0, 0.0)
        ij = np.floor(reps[:, :2] / cell_m).astype(np.int64)
        origin = ij.min(axis=0)
        ij -= origin
        grid = np.zeros((ij[:, 1].max() + 1, ij[:, 0].max() + 1), dtype=np.int64)
        np.add.at(grid, (ij[:, 1], ij[:, 0]), 1)
        return grid, tuple(origin * cell_m)


class ScanInsertion(NamedTuple):
    map: GlobalMap
    refined_pose: RigidTransform3
    # None means the scan went in at its seed pose ("seeded-only")
    result: Optional[IcpResult]


OVERLAP_VOXELS = 4


def overlap_radius(global_map, icp):
    """Seed-placed scan points closer than this to the map count as already mapped."""
    return min(icp.max_correspondence_m, OVERLAP_VOXELS * global_map.voxel_size)


def insert_scan(global_map, scan, mount, icp=IcpParams()):
    """Place a sensor-frame scan into the map, refining the EKF seed with ICP when
    the map already covers enough of it."""
    if not len(scan.cloud):
        raise MappingError("cannot insert an empty scan")

    initial = pose2_to_transform3(scan.seed_pose, mount)
    # downsample on the world grid so a re-observed scene lands on existing centroids
    _, sums, counts = accumulate(initial.apply(scan.cloud.points), global_map.voxel_size)
    world_points = sums / counts[:, None]
    source = PointCloud(initial.inverse().apply(world_points))

    refined, result = initial, None
    if len(global_map) >= icp.min_correspondences:
        target = global_map.neighborhood(world_points, icp.max_correspondence_m)
        if len(target) >= max(icp.min_correspondences, 3):
            tree = cKDTree(target)
            dist, _ = tree.query(world_points, distance_upper_bound=overlap_radius(global_map, icp))
            # register on the part of the scan the map already covers; new territory
            # would only match the map's border and drag the scan towards it
            overlap = np.isfinite(dist)
            if int(overlap.sum()) >= icp.min_correspondences:
                try:
                    result = icp_register(PointCloud(source.points[overlap]), PointCloud(target),
                                          initial, icp, tree=tree)
                    refined = result.transform
                except CorrespondenceError as exc:
                    logger.warning("scan at t=%s kept at its seed: %s", scan.timestamp, exc)

    global_map.insert_points(refined.apply(source.points))
    return ScanInsertion(global_map, refined, result)

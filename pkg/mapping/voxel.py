import numpy as np

from exceptions import MappingError
from models import PointCloud

# voxel indices are packed into one int64 key: 21 bits per axis
_BITS = 21
_OFFSET = 1 << (_BITS - 1)
_MASK = (1 << _BITS) - 1


def voxel_indices(points, voxel_size):
    return np.floor(np.asarray(points, dtype=np.float64) / voxel_size).astype(np.int64)


def pack_keys(indices):
    """Pack (N, 3) voxel indices into sortable int64 keys; order is lexicographic in (i, j, k)."""
    shifted = indices + _OFFSET
    if np.any(shifted < 0) or np.any(shifted > _MASK):
        raise MappingError("point lies outside the representable voxel range")
    return (shifted[:, 0] << (2 * _BITS)) | (shifted[:, 1] << _BITS) | shifted[:, 2]


def unpack_keys(keys):
    keys = np.asarray(keys, dtype=np.int64)
    return np.column_stack([
        (keys >> (2 * _BITS)) & _MASK,
        (keys >> _BITS) & _MASK,
        keys & _MASK,
    ]) - _OFFSET


def accumulate(points, voxel_size, values=None):
    """Group points by voxel: (sorted keys, per-voxel sums of `values`, counts).

    `values` defaults to the points themselves.
    """
    values = points if values is None else values
    keys = pack_keys(voxel_indices(points, voxel_size))
    unique, inverse = np.unique(keys, return_inverse=True)
    inverse = inverse.ravel()
    sums = np.column_stack([
        np.bincount(inverse, weights=values[:, axis], minlength=len(unique))
        for axis in range(values.shape[1])
    ])
    return unique, sums, np.bincount(inverse, minlength=len(unique))


def voxel_downsample(cloud, voxel_size):
    """One centroid per occupied voxel, sorted by voxel index. Colors are averaged."""
    if not voxel_size > 0:
        raise MappingError("voxel_size must be positive")
    if not len(cloud):
        return PointCloud.empty()

    _, sums, counts = accumulate(cloud.points, voxel_size)
    centroids = sums / counts[:, None]

    colors = None
    if cloud.colors is not None:
        _, color_sums, _ = accumulate(cloud.points, voxel_size, cloud.colors.astype(np.float64))
        colors = np.rint(color_sums / counts[:, None]).astype(np.uint8)
    return PointCloud(centroids, colors)

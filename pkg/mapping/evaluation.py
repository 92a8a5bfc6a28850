import numpy as np

from exceptions import MappingError


def _distance_to_floor(points, floor):
    xmin, xmax, ymin, ymax = floor
    dx = np.maximum.reduce([xmin - points[:, 0], np.zeros(len(points)), points[:, 0] - xmax])
    dy = np.maximum.reduce([ymin - points[:, 1], np.zeros(len(points)), points[:, 1] - ymax])
    return np.sqrt(dx ** 2 + dy ** 2 + points[:, 2] ** 2)


def _distance_to_box_surface(points, box):
    lo, hi = box.min_corner, box.max_corner
    outside = np.maximum(np.maximum(lo - points, 0.0), points - hi)
    outer = np.linalg.norm(outside, axis=1)
    inner = np.min(np.minimum(points - lo, hi - points), axis=1)
    inside = np.all((points >= lo) & (points <= hi), axis=1)
    return np.where(inside, inner, outer)


def surface_distances(points, world):
    """Distance from each point to the nearest world surface (floor or box face)."""
    points = np.reshape(np.asarray(points, dtype=np.float64), (-1, 3))
    dist = _distance_to_floor(points, world.floor)
    for box in world.boxes:
        dist = np.minimum(dist, _distance_to_box_surface(points, box))
    return dist


def map_error(global_map, world):
    if not len(global_map):
        raise MappingError("cannot score an empty map")
    dist = surface_distances(global_map.points(), world)
    return {
        "mean_abs_m": float(np.mean(dist)),
        "p95_abs_m": float(np.percentile(dist, 95)),
        "outlier_fraction": float(np.mean(dist > 3.0 * global_map.voxel_size)),
    }

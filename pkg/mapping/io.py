import logging

import cv2
import numpy as np
import pandas as pd

from depth.io import write_ply
from exceptions import MappingError

logger = logging.getLogger(__name__)

POSE_COLUMNS = ["timestamp", "x", "y", "theta", "converged", "rmse"]


def export_map_ply(path, global_map, float_format="%.9g"):
    write_ply(path, global_map.as_cloud(), float_format)


def write_refined_poses(path, refined_poses, float_format="%.9g"):
    rows = [
        [p.timestamp, p.pose.x, p.pose.y, p.pose.theta, int(p.converged), p.rmse]
        for p in refined_poses
    ]
    pd.DataFrame(rows, columns=POSE_COLUMNS).to_csv(path, index=False, float_format=float_format)
    logger.info("wrote %d refined poses to %s", len(rows), path)


def write_top_view(path, global_map, cell_m):
    grid, _ = global_map.top_view(cell_m)
    if not grid.size:
        raise MappingError("cannot render the top view of an empty map")
    # occupied cells white, image row 0 at the largest y
    image = np.where(grid[::-1] > 0, 255, 0).astype(np.uint8)
    if not cv2.imwrite(str(path), image):
        raise MappingError(f"cannot write top view {path}")

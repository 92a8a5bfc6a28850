"""SimLog export and pose-track loading for the metrics command."""
import logging

import pandas as pd
import yaml

from exceptions import SimulationError
from localization.io import quantize, write_observations
from mapping.io import export_map_ply, write_refined_poses, write_top_view
from models import Pose2, StampedPose

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = [
    "timestamp", "truth_x", "truth_y", "truth_theta", "est_x", "est_y", "est_theta", "cov_trace",
]
TRAJECTORY_FILE = "trajectory.csv"
OBSERVATIONS_FILE = "observations.csv"
MAP_FILE = "map.ply"
METRICS_FILE = "metrics.yaml"
POSES_FILE = "refined_poses.csv"
TOP_VIEW_FILE = "top_view.pgm"


def write_trajectory(path, log, float_format="%.9g"):
    truth = {s.timestamp: s.pose for s in log.truth}
    rows = []
    for r in log.estimates:
        t = truth.get(r.timestamp)
        if t is None:
            raise SimulationError(f"no ground truth at t={r.timestamp}")
        rows.append([r.timestamp, t.x, t.y, t.theta, r.pose.x, r.pose.y, r.pose.theta, r.cov_trace])
    frame = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    frame.to_csv(path, index=False, float_format=float_format)


def rounded(value):
    """Metrics with every float cut to the 9 digits used everywhere else."""
    if isinstance(value, dict):
        return {k: rounded(v) for k, v in value.items()}
    if isinstance(value, float):
        return quantize(value)
    return value


def write_metrics(path, metrics):
    with open(path, "w") as fh:
        yaml.safe_dump(rounded(metrics), fh, sort_keys=True)


def export_log(log, config, path_for, float_format="%.9g"):
    """Write every SimLog artifact; `path_for(name)` resolves a file name in the output dir."""
    written = [TRAJECTORY_FILE, OBSERVATIONS_FILE, MAP_FILE, METRICS_FILE]
    write_trajectory(path_for(TRAJECTORY_FILE), log, float_format)
    write_observations(path_for(OBSERVATIONS_FILE), log.observations, float_format)
    export_map_ply(path_for(MAP_FILE), log.global_map, float_format)
    write_metrics(path_for(METRICS_FILE), log.metrics)

    if config.mapping.export_poses:
        write_refined_poses(path_for(POSES_FILE), log.refined_poses, float_format)
        written.append(POSES_FILE)
    if config.mapping.top_view and len(log.global_map):
        write_top_view(path_for(TOP_VIEW_FILE), log.global_map, config.mapping.voxel_size)
        written.append(TOP_VIEW_FILE)
    logger.info("exported %s", ", ".join(written))
    return written


def read_pose_track(path, prefix):
    """Timestamped poses from a CSV with `<prefix>x,<prefix>y,<prefix>theta` or plain
    `x,y,theta` columns (trajectory.csv and estimates.csv both qualify)."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise SimulationError(f"{path}: empty pose file") from None
    for p in (prefix, ""):
        columns = ["timestamp", f"{p}x", f"{p}y", f"{p}theta"]
        if all(c in frame.columns for c in columns):
            break
    else:
        raise SimulationError(f"{path}: needs timestamp and {prefix}x/y/theta (or x/y/theta) columns")
    return [
        StampedPose(float(t), Pose2(float(x), float(y), float(th)))
        for t, x, y, th in frame[columns].itertuples(index=False)
    ]

"""Beacon maps and observation logs as CSV."""
import logging
import math

import numpy as np
import pandas as pd

from exceptions import LocalizationError, OutOfOrderError
from models import (
    Beacon, BearingObservation, OdometryDelta, PathLossParams, Pose2, PriorObservation,
    RssiObservation,
)

logger = logging.getLogger(__name__)

BEACON_COLUMNS = ["id", "x", "y", "z", "p0_dbm", "n", "d0", "sigma_sh"]
OBSERVATION_COLUMNS = [
    "timestamp", "type", "beacon_id", "rssi", "bearing", "sigma",
    "d_rot1", "d_trans", "d_rot2", "x", "y", "theta", "var_x", "var_y", "var_theta",
]
ESTIMATE_COLUMNS = ["timestamp", "x", "y", "theta", "cov_trace"]


def quantize(value, digits=9):
    """Round to the precision every CSV in this project is written with."""
    return float(f"{value:.{digits}g}")


def _csv_line(index):
    # header is line 1
    return int(index) + 2


def read_beacons(path):
    frame = pd.read_csv(path, dtype={"id": str}, float_precision="round_trip")
    missing = [c for c in BEACON_COLUMNS if c not in frame.columns]
    if missing:
        raise LocalizationError(f"{path}: missing beacon columns {missing}")
    beacons = {}
    for index, row in frame.iterrows():
        if row["id"] in beacons:
            raise LocalizationError(f"{path} line {_csv_line(index)}: duplicate beacon id {row['id']}")
        beacons[row["id"]] = Beacon(
            row["id"],
            np.array([row["x"], row["y"], row["z"]], dtype=np.float64),
            PathLossParams(row["p0_dbm"], row["n"], row["d0"], row["sigma_sh"]),
        )
    return beacons


def write_beacons(path, beacons, float_format="%.9g"):
    rows = [
        [b.id, *b.position, b.path_loss.p0_dbm, b.path_loss.n, b.path_loss.d0, b.path_loss.sigma_sh]
        for b in beacons
    ]
    pd.DataFrame(rows, columns=BEACON_COLUMNS).to_csv(path, index=False, float_format=float_format)


def _observation_row(event):
    if isinstance(event, PriorObservation):
        var_x, var_y, var_theta = event.variances
        return {"type": "prior", "x": event.pose.x, "y": event.pose.y, "theta": event.pose.theta,
                "var_x": var_x, "var_y": var_y, "var_theta": var_theta}
    if isinstance(event, OdometryDelta):
        return {"type": "odom", "d_rot1": event.d_rot1, "d_trans": event.d_trans,
                "d_rot2": event.d_rot2}
    if isinstance(event, RssiObservation):
        return {"type": "rssi", "beacon_id": event.beacon_id, "rssi": event.rssi}
    if isinstance(event, BearingObservation):
        return {"type": "bearing", "beacon_id": event.beacon_id, "bearing": event.bearing,
                "sigma": event.sigma}
    raise LocalizationError(f"cannot log event of type {type(event).__name__}")


def write_observations(path, events, float_format="%.9g"):
    rows = [dict(timestamp=e.timestamp, **_observation_row(e)) for e in events]
    frame = pd.DataFrame(rows, columns=OBSERVATION_COLUMNS)
    frame.to_csv(path, index=False, float_format=float_format)
    logger.info("wrote %d observations to %s", len(rows), path)


def _event_from_row(row, line):
    kind = row["type"]
    t = float(row["timestamp"])

    def num(key):
        return float(row[key])

    try:
        if kind == "prior":
            return PriorObservation(Pose2(num("x"), num("y"), num("theta")),
                                    (num("var_x"), num("var_y"), num("var_theta")), t)
        if kind == "odom":
            return OdometryDelta(num("d_rot1"), num("d_trans"), num("d_rot2"), t)
        if kind == "rssi":
            return RssiObservation(str(row["beacon_id"]), num("rssi"), t)
        if kind == "bearing":
            return BearingObservation(str(row["beacon_id"]), num("bearing"), t, num("sigma"))
    except (KeyError, TypeError, ValueError, LocalizationError) as exc:
        raise LocalizationError(f"line {line}: {exc}") from exc
    raise LocalizationError(f"line {line}: unknown observation type {kind!r}")


def read_observations(path):
    """Parse an observation log, rejecting timestamps that run backwards."""
    try:
        frame = pd.read_csv(path, dtype={"type": str, "beacon_id": str},
                            float_precision="round_trip")
    except pd.errors.EmptyDataError:
        return []
    if "timestamp" not in frame.columns or "type" not in frame.columns:
        raise LocalizationError(f"{path}: observation log needs timestamp and type columns")

    events, previous = [], -math.inf
    for index, row in frame.iterrows():
        line = _csv_line(index)
        t = float(row["timestamp"])
        if not math.isfinite(t):
            raise LocalizationError(f"line {line}: timestamp is not finite")
        if t < previous:
            raise OutOfOrderError(line, t, previous)
        previous = t
        events.append(_event_from_row(row, line))
    return events


def write_estimates(path, records, float_format="%.9g"):
    rows = [[r.timestamp, r.pose.x, r.pose.y, r.pose.theta, r.cov_trace] for r in records]
    pd.DataFrame(rows, columns=ESTIMATE_COLUMNS).to_csv(path, index=False, float_format=float_format)

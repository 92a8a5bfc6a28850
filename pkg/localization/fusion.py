"""Timestamp-ordered replay of an observation stream through the EKF.

The scenario runner and the offline `fuse` command both go through
`Localizer.run`, so an observation log replayed offline reproduces the
in-loop estimates exactly.
"""
import logging
from itertools import groupby

from exceptions import LocalizationError, UnknownBeaconError
from localization.ekf import ekf_predict, ekf_update_bearing, ekf_update_rssi, initial_state
from models import (
    BearingObservation, DepthFrame, EkfNoise, EstimateRecord, OdometryDelta, Pose2,
    PriorObservation, RssiObservation,
)

logger = logging.getLogger(__name__)

# tie-break order for events sharing a timestamp
EVENT_RANK = {
    PriorObservation: 0,
    OdometryDelta: 1,
    RssiObservation: 2,
    BearingObservation: 3,
    DepthFrame: 4,
}
DEFAULT_PRIOR_VARIANCES = (1.0, 1.0, 0.1)


def event_key(event):
    return (event.timestamp, EVENT_RANK[type(event)], getattr(event, "beacon_id", ""))


def sort_events(events):
    return sorted(events, key=event_key)


class Localizer:
    """Owns one EKF state and applies events to it in the order given."""

    def __init__(self, beacons, noise=EkfNoise(), receiver_height=0.3, state=None):
        self.beacons = dict(beacons)
        self.noise = noise
        self.receiver_height = receiver_height
        self.state = state or initial_state(Pose2(), DEFAULT_PRIOR_VARIANCES)
        self.gated = {"rssi": 0, "bearing": 0}
        self.applied = {"rssi": 0, "bearing": 0}

    def _beacon(self, beacon_id):
        try:
            return self.beacons[beacon_id]
        except KeyError:
            raise UnknownBeaconError(beacon_id) from None

    def apply(self, event):
        if isinstance(event, PriorObservation):
            self.state = initial_state(event.pose, event.variances, event.timestamp)
            return
        if isinstance(event, OdometryDelta):
            self.state = ekf_predict(self.state, event, self.noise)
            return
        if isinstance(event, RssiObservation):
            kind = "rssi"
            self.state, gated = ekf_update_rssi(
                self.state, event, self._beacon(event.beacon_id),
                self.receiver_height, self.noise.gate_chi2,
            )
        elif isinstance(event, BearingObservation):
            kind = "bearing"
            self.state, gated = ekf_update_bearing(
                self.state, event, self._beacon(event.beacon_id), self.noise.gate_chi2,
            )
        else:
            raise LocalizationError(f"cannot fuse event of type {type(event).__name__}")

        if gated:
            self.gated[kind] += 1
            logger.debug("gated %s update from %s at t=%s", kind, event.beacon_id, event.timestamp)
        else:
            self.applied[kind] += 1

    def run(self, events, on_depth=None):
        """Apply sorted events; record an estimate after each timestamp that carried
        odometry or a prior. Depth frames are handed to `on_depth(frame, state)`.
        """
        records = []
        for timestamp, group in groupby(events, key=lambda e: e.timestamp):
            record = False
            for event in group:
                if isinstance(event, DepthFrame):
                    if on_depth is not None:
                        on_depth(event, self.state)
                    continue
                self.apply(event)
                record = record or isinstance(event, (OdometryDelta, PriorObservation))
            if record:
                records.append(EstimateRecord(timestamp, self.state.mean, self.state.cov.trace))
        return records

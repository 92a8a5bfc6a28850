"""Closed-loop scenario: synthetic sensors feeding the EKF and the global map.

Everything happens on one timeline. Observations are generated up front from
the ground-truth trajectory, rounded to the precision they are logged with,
sorted, and replayed through the same Localizer the ``fuse`` command uses.
Depth frames are rendered lazily when the replay reaches them, because the
map insertion is seeded with the filter state at that moment.
"""
import dataclasses
import logging
import math

from depth.pipeline import back_project
from exceptions import ConfigError
from geometry.transforms import pose2_to_transform3, transform3_to_pose2
from localization.ekf import integrate_odometry
from localization.fusion import Localizer, sort_events
from localization.io import quantize
from mapping.evaluation import map_error
from mapping.global_map import GlobalMap, insert_scan
from models import (
    BearingObservation, DepthFrame, OdometryDelta, Pose2, PriorObservation, RefinedPose,
    RssiObservation, Scan, SimLog, StampedPose,
)
from simulation.config import channel_rng
from simulation.evaluation import pose_rmse
from simulation.sensors import corrupt_depth, simulate_bearing, simulate_odometry, simulate_rssi
from simulation.trajectory import Trajectory
from simulation.world import raycast_depth

logger = logging.getLogger(__name__)


def ticks(rate_hz, duration):
    """Quantized timestamps k / rate for k = 1 .. floor(duration * rate)."""
    count = int(math.floor(duration * rate_hz + 1e-9))
    return [quantize(k / rate_hz) for k in range(1, count + 1)]


def _quantized_pose(pose):
    return Pose2(quantize(pose.x), quantize(pose.y), quantize(pose.theta))


def _quantized(event):
    if isinstance(event, OdometryDelta):
        return dataclasses.replace(event, d_rot1=quantize(event.d_rot1),
                                   d_trans=quantize(event.d_trans), d_rot2=quantize(event.d_rot2))
    if isinstance(event, RssiObservation):
        return dataclasses.replace(event, rssi=quantize(event.rssi))
    if isinstance(event, BearingObservation):
        return dataclasses.replace(event, bearing=quantize(event.bearing), sigma=quantize(event.sigma))
    return event


def generate_events(config, trajectory):
    """Prior, odometry, RSSI, bearing and depth-frame events plus the truth track."""
    noise, rates = config.noise, config.rates
    beacons = sorted(config.world.beacons, key=lambda b: b.id)

    prior = PriorObservation(
        _quantized_pose(trajectory.pose_at(0.0)),
        tuple(quantize(v) for v in (config.initial_sigma_xy ** 2, config.initial_sigma_xy ** 2,
                                    config.initial_sigma_theta ** 2)),
        0.0,
    )
    events = [prior]
    truth = [StampedPose(0.0, trajectory.pose_at(0.0))]

    odom_rng = channel_rng(config.seed, "odometry")
    prev = truth[0].pose
    for t in ticks(rates.odom_hz, config.duration):
        curr = trajectory.pose_at(t)
        truth.append(StampedPose(t, curr))
        events.append(_quantized(simulate_odometry(prev, curr, noise.alphas, odom_rng, t)))
        prev = curr

    rssi_rng = channel_rng(config.seed, "rssi")
    for t in ticks(rates.ble_hz, config.duration):
        pose = trajectory.pose_at(t)
        for beacon in beacons:
            events.append(_quantized(
                simulate_rssi(pose, beacon, config.receiver_height, rssi_rng, t)))

    if noise.bearings:
        bearing_rng = channel_rng(config.seed, "bearing")
        for t in ticks(rates.bearing_hz, config.duration):
            pose = trajectory.pose_at(t)
            for beacon in beacons:
                events.append(_quantized(
                    simulate_bearing(pose, beacon, noise.bearing_sigma, bearing_rng, t)))

    for t in ticks(rates.depth_hz, config.duration):
        events.append(DepthFrame(t, trajectory.pose_at(t)))

    return sort_events(events), truth


class _MapBuilder:
    """Depth-frame handler: render, corrupt, back-project and insert one frame."""

    def __init__(self, config, log):
        self.config = config
        self.log = log
        self.map = GlobalMap(config.mapping.voxel_size)
        self.rng = channel_rng(config.seed, "depth")
        self.icp_counts = {"registered": 0, "converged": 0, "seeded_only": 0, "empty": 0}

    def __call__(self, frame, state):
        cfg = self.config
        sensor = pose2_to_transform3(frame.truth_pose, cfg.mount)
        depth = raycast_depth(cfg.world, sensor, cfg.intrinsics)
        depth = corrupt_depth(depth, cfg.noise.depth_sigma_rel, cfg.noise.depth_quantize_mm,
                              self.rng, cfg.intrinsics.max_depth)
        if cfg.retain_depth:
            self.log.depth_frames.append((frame.timestamp, depth))

        cloud = back_project(depth, cfg.intrinsics)
        if not len(cloud):
            self.icp_counts["empty"] += 1
            logger.debug("depth frame at t=%s has no valid pixels", frame.timestamp)
            return

        seed = frame.truth_pose if cfg.mapping.truth_seeds else state.mean
        insertion = insert_scan(self.map, Scan(cloud, seed, state.cov, frame.timestamp),
                                cfg.mount, cfg.icp)
        result = insertion.result
        if result is None:
            self.icp_counts["seeded_only"] += 1
        else:
            self.icp_counts["registered"] += 1
            self.icp_counts["converged"] += int(result.converged)
        self.log.refined_poses.append(RefinedPose(
            frame.timestamp,
            transform3_to_pose2(insertion.refined_pose, cfg.mount),
            bool(result is not None and result.converged),
            result.rmse if result is not None else math.nan,
        ))


def _map_metrics(global_map, world):
    metrics = {"voxels": len(global_map)}
    if len(global_map):
        metrics.update(map_error(global_map, world))
    return metrics


def run_scenario(config):
    if config.duration < 0:
        raise ConfigError("duration: must be nonnegative")
    trajectory = Trajectory(config.trajectory)
    if trajectory.duration > config.duration:
        logger.info("path takes %.1f s; the scenario stops after %.1f s",
                    trajectory.duration, config.duration)

    log = SimLog()
    events, log.truth = generate_events(config, trajectory)
    log.observations = [e for e in events if not isinstance(e, DepthFrame)]

    localizer = Localizer(config.world.beacon_map(), config.ekf, config.receiver_height)
    builder = _MapBuilder(config, log)
    logger.info("running scenario: %d events over %.1f s (seed %d)",
                len(events), config.duration, config.seed)
    log.estimates = localizer.run(events, on_depth=builder)
    log.global_map = builder.map

    prior = events[0]
    odometry = [e for e in events if isinstance(e, OdometryDelta)]
    log.dead_reckoning = integrate_odometry(StampedPose(prior.timestamp, prior.pose), odometry)
    log.gated = dict(localizer.gated)

    estimated = [StampedPose(r.timestamp, r.pose) for r in log.estimates]
    log.metrics = {
        "duration_s": config.duration,
        "seed": config.seed,
        "events": {
            "odometry": len(odometry),
            "rssi": sum(isinstance(e, RssiObservation) for e in events),
            "bearing": sum(isinstance(e, BearingObservation) for e in events),
            "depth": sum(isinstance(e, DepthFrame) for e in events),
        },
        "fusion": pose_rmse(estimated, log.truth),
        "dead_reckoning": pose_rmse(log.dead_reckoning, log.truth),
        "gated": dict(localizer.gated),
        "applied": dict(localizer.applied),
        "icp": dict(builder.icp_counts),
        "map": _map_metrics(builder.map, config.world),
    }
    logger.info("scenario done: fused rmse_xy %.3f m, dead reckoning %.3f m, %d voxels "
                "(gated rssi=%d bearing=%d)",
                log.metrics["fusion"]["rmse_xy_m"], log.metrics["dead_reckoning"]["rmse_xy_m"],
                len(builder.map), localizer.gated["rssi"], localizer.gated["bearing"])
    return log

"""Scenario documents: YAML in, validated ScenarioConfig out.

Every section is checked against a fixed set of keys, so a typo anywhere in
the document (or in a ``--set`` override) fails with the dotted key named.
"""
import logging
import math

import numpy as np
import yaml

from exceptions import ConfigError, PogError
from geometry.transforms import camera_mount
from models import (
    Beacon, Box, CameraIntrinsics, EkfNoise, IcpParams, MappingConfig, NoiseConfig,
    PathLossParams, Rates, ScenarioConfig, TrajectorySpec, World,
)
from simulation.trajectory import Trajectory

logger = logging.getLogger(__name__)

REQUIRED = object()

# one independent random stream per sensor channel
CHANNELS = {"beacons": 0, "odometry": 1, "rssi": 2, "bearing": 3, "depth": 4}

TOP_KEYS = {
    "world": REQUIRED, "trajectory": REQUIRED, "camera": REQUIRED, "rates": None,
    "noise": None, "ekf": None, "icp": None, "mapping": None,
    "receiver_height": 0.3, "seed": 0, "duration": 120.0, "retain_depth": False,
}
WORLD_KEYS = {"floor": REQUIRED, "boxes": (), "beacons": ()}
BOX_KEYS = {"min": REQUIRED, "max": REQUIRED}
PATH_LOSS_KEYS = {"p0_dbm": -59.0, "n": 2.0, "d0": 1.0, "sigma_sh": 2.0}
BEACON_KEYS = {"id": REQUIRED, "x": REQUIRED, "y": REQUIRED, "z": 2.5, **PATH_LOSS_KEYS}
RANDOM_BEACON_KEYS = {"count": REQUIRED, "height": 2.5, "margin": 0.5, **PATH_LOSS_KEYS}
TRAJECTORY_KEYS = {"waypoints": REQUIRED, "speed": REQUIRED, "turn_rate": math.pi / 4}
CAMERA_KEYS = {
    "fx": REQUIRED, "fy": REQUIRED, "cx": REQUIRED, "cy": REQUIRED,
    "width": REQUIRED, "height": REQUIRED, "max_depth": 8.0, "mount": None,
}
MOUNT_KEYS = {"height": 0.5, "pitch": 0.0, "forward": 0.0}
RATE_KEYS = {"depth_hz": 9.0, "ble_hz": 10.0, "odom_hz": 20.0, "bearing_hz": 10.0}
NOISE_KEYS = {
    "alphas": (0.002, 0.002, 0.002, 0.002), "depth_sigma_rel": 0.01,
    "depth_quantize_mm": True, "bearing_sigma": 0.05, "bearings": True,
}
EKF_KEYS = {"alphas": None, "gate_chi2": 6.63, "initial_sigma_xy": 0.5, "initial_sigma_theta": 0.1}
ICP_KEYS = {
    "max_iterations": 50, "max_correspondence_m": 0.5,
    "convergence_eps": 1e-4, "min_correspondences": 10,
}
MAPPING_KEYS = {"voxel_size": 0.05, "truth_seeds": False, "top_view": False, "export_poses": False}


def channel_rng(seed, channel):
    return np.random.default_rng([int(seed), CHANNELS[channel]])


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _section(data, path, allowed):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'scenario'}: expected a mapping")
    unknown = sorted(str(k) for k in data if k not in allowed)
    if unknown:
        raise ConfigError(f"unknown config key: {_join(path, unknown[0])}")
    out = {}
    for key, default in allowed.items():
        if key not in data and default is REQUIRED:
            raise ConfigError(f"missing config key: {_join(path, key)}")
        out[key] = data.get(key, default)
    return out


def _number(value, key, cast=float):
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    try:
        number = cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ConfigError(f"{key}: must be finite")
    return number


def _flag(value, key):
    if not isinstance(value, bool):
        raise ConfigError(f"{key}: expected true or false, got {value!r}")
    return value


def _vector(value, key, length):
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(f"{key}: expected a list of {length} numbers")
    return tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))


def _path_loss(values, path):
    return PathLossParams(*(_number(values[k], _join(path, k)) for k in PATH_LOSS_KEYS))


def _explicit_beacons(items, path):
    beacons = []
    for i, item in enumerate(items):
        where = f"{path}[{i}]"
        values = _section(item, where, BEACON_KEYS)
        position = [_number(values[k], _join(where, k)) for k in ("x", "y", "z")]
        beacons.append(Beacon(str(values["id"]), np.array(position), _path_loss(values, where)))
    return beacons


def _random_beacons(spec, path, floor, seed):
    values = _section(spec, path, RANDOM_BEACON_KEYS)
    count = _number(values["count"], _join(path, "count"), int)
    height = _number(values["height"], _join(path, "height"))
    margin = _number(values["margin"], _join(path, "margin"))
    if count < 0:
        raise ConfigError(f"{_join(path, 'count')}: must be nonnegative")
    xmin, xmax, ymin, ymax = floor
    if not (xmax - xmin > 2 * margin and ymax - ymin > 2 * margin):
        raise ConfigError(f"{_join(path, 'margin')}: leaves no room on the floor")
    rng = channel_rng(seed, "beacons")
    xy = rng.uniform([xmin + margin, ymin + margin], [xmax - margin, ymax - margin], size=(count, 2))
    # micrometre positions survive the beacons.csv round trip unchanged
    xy = np.round(xy, 6)
    pl = _path_loss(values, path)
    width = max(2, len(str(count)))
    return [
        Beacon(f"b{i + 1:0{width}d}", np.array([x, y, height]), pl)
        for i, (x, y) in enumerate(xy)
    ]


def _world(data, seed):
    values = _section(data, "world", WORLD_KEYS)
    floor = _vector(values["floor"], "world.floor", 4)

    boxes = []
    for i, item in enumerate(values["boxes"] or ()):
        where = f"world.boxes[{i}]"
        corners = _section(item, where, BOX_KEYS)
        boxes.append(Box(np.array(_vector(corners["min"], _join(where, "min"), 3)),
                         np.array(_vector(corners["max"], _join(where, "max"), 3))))

    beacons = values["beacons"] or ()
    if isinstance(beacons, dict):
        random_spec = _section(beacons, "world.beacons", {"random": REQUIRED})["random"]
        beacons = _random_beacons(random_spec, "world.beacons.random", floor, seed)
    elif isinstance(beacons, (list, tuple)):
        beacons = _explicit_beacons(beacons, "world.beacons")
    else:
        raise ConfigError("world.beacons: expected a list or {random: ...}")
    return World(floor, tuple(boxes), tuple(beacons))


def _trajectory(data):
    values = _section(data, "trajectory", TRAJECTORY_KEYS)
    waypoints = values["waypoints"]
    if not isinstance(waypoints, (list, tuple)):
        raise ConfigError("trajectory.waypoints: expected a list of [x, y] pairs")
    points = tuple(_vector(p, f"trajectory.waypoints[{i}]", 2) for i, p in enumerate(waypoints))
    spec = TrajectorySpec(points, _number(values["speed"], "trajectory.speed"),
                          _number(values["turn_rate"], "trajectory.turn_rate"))
    Trajectory(spec)  # rejects coincident waypoints
    return spec


def _camera(data):
    values = _section(data, "camera", CAMERA_KEYS)
    intr = CameraIntrinsics(
        *(_number(values[k], f"camera.{k}") for k in ("fx", "fy", "cx", "cy")),
        _number(values["width"], "camera.width", int),
        _number(values["height"], "camera.height", int),
        _number(values["max_depth"], "camera.max_depth"),
    )
    mount = _section(values["mount"], "camera.mount", MOUNT_KEYS)
    return intr, camera_mount(*(_number(mount[k], f"camera.mount.{k}") for k in MOUNT_KEYS))


def _numbers(data, path, keys, casts=None):
    values = _section(data, path, keys)
    casts = casts or {}
    return {k: _number(v, _join(path, k), casts.get(k, float)) for k, v in values.items()}


def scenario_from_dict(doc):
    """Validate a parsed scenario document and build the ScenarioConfig."""
    top = _section(doc, "", TOP_KEYS)
    seed = _number(top["seed"], "seed", int)
    duration = _number(top["duration"], "duration")
    if duration < 0:
        raise ConfigError("duration: must be nonnegative")

    noise_values = _section(top["noise"], "noise", NOISE_KEYS)
    noise = NoiseConfig(
        alphas=_vector(noise_values["alphas"], "noise.alphas", 4),
        depth_sigma_rel=_number(noise_values["depth_sigma_rel"], "noise.depth_sigma_rel"),
        depth_quantize_mm=_flag(noise_values["depth_quantize_mm"], "noise.depth_quantize_mm"),
        bearing_sigma=_number(noise_values["bearing_sigma"], "noise.bearing_sigma"),
        bearings=_flag(noise_values["bearings"], "noise.bearings"),
    )
    if min(noise.alphas) < 0 or noise.depth_sigma_rel < 0:
        raise ConfigError("noise: alphas and depth_sigma_rel must be nonnegative")
    if not noise.bearing_sigma > 0:
        raise ConfigError("noise.bearing_sigma: must be positive")

    ekf_values = _section(top["ekf"], "ekf", EKF_KEYS)
    # the filter assumes the simulated odometry noise unless told otherwise
    ekf_alphas = noise.alphas
    if ekf_values["alphas"] is not None:
        ekf_alphas = _vector(ekf_values["alphas"], "ekf.alphas", 4)
    mapping_values = _section(top["mapping"], "mapping", MAPPING_KEYS)

    try:
        intr, mount = _camera(top["camera"])
        config = ScenarioConfig(
            world=_world(top["world"], seed),
            trajectory=_trajectory(top["trajectory"]),
            intrinsics=intr,
            mount=mount,
            rates=Rates(**_numbers(top["rates"], "rates", RATE_KEYS)),
            noise=noise,
            ekf=EkfNoise(*ekf_alphas, gate_chi2=_number(ekf_values["gate_chi2"], "ekf.gate_chi2")),
            initial_sigma_xy=_number(ekf_values["initial_sigma_xy"], "ekf.initial_sigma_xy"),
            initial_sigma_theta=_number(ekf_values["initial_sigma_theta"], "ekf.initial_sigma_theta"),
            icp=IcpParams(**_numbers(top["icp"], "icp", ICP_KEYS, {
                "max_iterations": int, "min_correspondences": int,
            })),
            mapping=MappingConfig(
                voxel_size=_number(mapping_values["voxel_size"], "mapping.voxel_size"),
                **{k: _flag(mapping_values[k], f"mapping.{k}")
                   for k in ("truth_seeds", "top_view", "export_poses")},
            ),
            receiver_height=_number(top["receiver_height"], "receiver_height"),
            seed=seed,
            duration=duration,
            retain_depth=_flag(top["retain_depth"], "retain_depth"),
        )
    except ConfigError:
        raise
    except PogError as exc:
        raise ConfigError(str(exc)) from exc
    if not config.mapping.voxel_size > 0:
        raise ConfigError("mapping.voxel_size: must be positive")
    if not (config.initial_sigma_xy > 0 and config.initial_sigma_theta > 0):
        raise ConfigError("ekf: initial sigmas must be positive")
    return config


def apply_overrides(doc, overrides):
    """Apply ``a.b.c=value`` overrides in place; values are parsed as YAML scalars."""
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        parts = key.split(".")
        node = doc
        for depth, part in enumerate(parts[:-1]):
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"unknown config key: {'.'.join(parts[:depth + 2])}")
            node = child
        try:
            node[parts[-1]] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {key}: {exc}") from exc
    return doc


def load_scenario(path, overrides=()):
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    config = scenario_from_dict(apply_overrides(doc, overrides))
    logger.debug("loaded scenario %s (%d beacons, seed %d)", path, len(config.world.beacons),
                 config.seed)
    return config

import copy

import numpy as np
import pytest
import yaml

from app import create_app
from config import TestingConfig
from models import Beacon, Box, CameraIntrinsics, PathLossParams, World

# a 4 m x 3 m room, one crate, beacons in the corners, and a small camera so
# closed-loop scenarios run in well under a second
SMALL_SCENARIO = {
    "seed": 3,
    "duration": 6.0,
    "receiver_height": 0.3,
    "world": {
        "floor": [0.0, 4.0, 0.0, 3.0],
        "boxes": [
            {"min": [3.5, 0.0, 0.0], "max": [3.8, 3.0, 1.5]},
            {"min": [2.0, 2.2, 0.0], "max": [2.6, 2.8, 0.8]},
        ],
        "beacons": [
            {"id": "a", "x": 0.2, "y": 0.2, "z": 2.5},
            {"id": "b", "x": 3.8, "y": 0.2, "z": 2.5},
            {"id": "c", "x": 3.8, "y": 2.8, "z": 2.5},
            {"id": "d", "x": 0.2, "y": 2.8, "z": 2.5},
        ],
    },
    "trajectory": {"waypoints": [[0.5, 1.0], [2.5, 1.0]], "speed": 0.5, "turn_rate": 0.8},
    "camera": {
        "fx": 20.0, "fy": 20.0, "cx": 15.5, "cy": 11.5, "width": 32, "height": 24,
        "max_depth": 6.0, "mount": {"height": 0.5, "pitch": 0.2},
    },
    "rates": {"depth_hz": 2.0, "ble_hz": 5.0, "odom_hz": 10.0, "bearing_hz": 5.0},
    "noise": {
        "alphas": [0.01, 0.002, 0.01, 0.002], "depth_sigma_rel": 0.01,
        "depth_quantize_mm": True, "bearing_sigma": 0.05, "bearings": True,
    },
    "mapping": {"voxel_size": 0.1},
}


@pytest.fixture()
def app():
    return create_app(TestingConfig)


@pytest.fixture()
def runner(app):
    return app.test_cli_runner()


@pytest.fixture()
def scenario_doc():
    return copy.deepcopy(SMALL_SCENARIO)


@pytest.fixture()
def scenario_file(tmp_path, scenario_doc):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(scenario_doc))
    return path


@pytest.fixture()
def intrinsics():
    return CameraIntrinsics(fx=100.0, fy=100.0, cx=50.0, cy=40.0, width=101, height=81, max_depth=10.0)


@pytest.fixture()
def square_world():
    """10 m x 10 m floor with four beacons near the corners."""
    pl = PathLossParams(p0_dbm=-59.0, n=2.0, d0=1.0, sigma_sh=2.0)
    corners = [(1.0, 1.0), (9.0, 1.0), (9.0, 9.0), (1.0, 9.0)]
    beacons = [Beacon(f"b{i}", np.array([x, y, 2.5]), pl) for i, (x, y) in enumerate(corners)]
    return World((0.0, 10.0, 0.0, 10.0), (Box(np.array([4.0, 4.0, 0.0]), np.array([5.0, 5.0, 1.0])),),
                 tuple(beacons))

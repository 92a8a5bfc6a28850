import math

import numpy as np
import pytest

from depth.pipeline import back_project
from exceptions import MappingError
from geometry.transforms import camera_mount, pose2_to_transform3, transform3_to_pose2
from mapping.evaluation import map_error, surface_distances
from mapping.global_map import GlobalMap, insert_scan, overlap_radius
from mapping.io import write_refined_poses, write_top_view
from models import (
    Box, CameraIntrinsics, Covariance3, IcpParams, PointCloud, Pose2, RefinedPose, Scan, World,
)
from simulation.world import raycast_depth

ROOM = World(
    (0.0, 6.0, 0.0, 4.0),
    (
        Box(np.array([5.8, 0.0, 0.0]), np.array([6.0, 4.0, 2.0])),
        Box(np.array([0.0, 3.8, 0.0]), np.array([6.0, 4.0, 2.0])),
        Box(np.array([3.0, 1.2, 0.0]), np.array([3.6, 1.8, 0.9])),
        Box(np.array([4.2, 2.6, 0.0]), np.array([4.8, 3.2, 1.4])),
    ),
)
CAMERA = CameraIntrinsics(60.0, 60.0, 39.5, 29.5, 80, 60, 8.0)
MOUNT = camera_mount(0.6, pitch=0.25)
COV = Covariance3.diag((0.01, 0.01, 0.001))


def scan_at(pose, timestamp=0.0, seed=None):
    depth = raycast_depth(ROOM, pose2_to_transform3(pose, MOUNT), CAMERA)
    return Scan(back_project(depth, CAMERA), seed or pose, COV, timestamp)


def test_first_scan_is_seeded_only():
    global_map = GlobalMap(0.05)
    truth = Pose2(1.0, 1.5, 0.3)
    insertion = insert_scan(global_map, scan_at(truth), MOUNT)
    assert insertion.result is None
    assert insertion.map is global_map
    assert len(global_map) > 0
    np.testing.assert_allclose(insertion.refined_pose.as_matrix(),
                               pose2_to_transform3(truth, MOUNT).as_matrix(), atol=1e-12)


def test_identical_rescan_changes_nothing():
    global_map = GlobalMap(0.05)
    truth = Pose2(1.0, 1.5, 0.3)
    insert_scan(global_map, scan_at(truth), MOUNT)
    voxels, points = len(global_map), global_map.points().copy()

    insertion = insert_scan(global_map, scan_at(truth, 1.0), MOUNT)
    assert insertion.result is not None
    np.testing.assert_allclose(insertion.refined_pose.as_matrix(),
                               pose2_to_transform3(truth, MOUNT).as_matrix(), atol=1e-6)
    assert len(global_map) == voxels
    np.testing.assert_allclose(global_map.points(), points, atol=1e-9)


def test_perturbed_seed_is_refined():
    global_map = GlobalMap(0.03)
    insert_scan(global_map, scan_at(Pose2(1.0, 1.5, 0.3)), MOUNT)

    truth = Pose2(1.2, 1.6, 0.35)
    seed = Pose2(truth.x + 0.04, truth.y - 0.03, truth.theta)
    insertion = insert_scan(global_map, scan_at(truth, 1.0, seed), MOUNT,
                            IcpParams(max_iterations=100, convergence_eps=1e-6))
    refined = transform3_to_pose2(insertion.refined_pose, MOUNT)
    assert insertion.result is not None
    assert math.hypot(refined.x - truth.x, refined.y - truth.y) < 0.01


def test_scan_reaching_into_new_territory_converges_in_place():
    global_map = GlobalMap(0.05)
    insert_scan(global_map, scan_at(Pose2(1.0, 1.5, 0.3)), MOUNT)

    # turned far enough that about half of the view is unmapped
    truth = Pose2(1.1, 1.5, 0.8)
    insertion = insert_scan(global_map, scan_at(truth, 1.0), MOUNT)
    refined = transform3_to_pose2(insertion.refined_pose, MOUNT)
    assert insertion.result is not None
    assert insertion.result.converged
    assert insertion.result.iterations < IcpParams().max_iterations
    assert math.hypot(refined.x - truth.x, refined.y - truth.y) < 0.03
    assert abs(refined.theta - truth.theta) < 0.02


def test_overlap_radius():
    assert overlap_radius(GlobalMap(0.05), IcpParams()) == pytest.approx(0.2)
    assert overlap_radius(GlobalMap(0.5), IcpParams()) == 0.5


def test_representatives_stay_inside_their_voxels():
    global_map = GlobalMap(0.05)
    for k, pose in enumerate([Pose2(1.0, 1.5, 0.3), Pose2(1.3, 1.4, 0.1), Pose2(1.5, 2.0, -0.2)]):
        insert_scan(global_map, scan_at(pose, float(k)), MOUNT)
    lo = global_map.voxel_indices() * global_map.voxel_size
    reps = global_map.points()
    assert np.all(reps >= lo - 1e-9)
    assert np.all(reps <= lo + global_map.voxel_size + 1e-9)
    assert global_map.counts.sum() >= len(global_map)


def test_empty_scan_is_rejected():
    with pytest.raises(MappingError):
        insert_scan(GlobalMap(0.05), Scan(PointCloud.empty(), Pose2(), COV, 0.0), MOUNT)


def test_truth_seeded_map_fidelity():
    global_map = GlobalMap(0.05)
    poses = [Pose2(0.8, 1.0 + 0.1 * k, 0.1 * k) for k in range(4)]
    for k, pose in enumerate(poses):
        scan = scan_at(pose, float(k))
        # noise-free, truth-placed: insert without registration
        global_map.insert_points(pose2_to_transform3(pose, MOUNT).apply(scan.cloud.points))
    report = map_error(global_map, ROOM)
    assert report["mean_abs_m"] <= global_map.voxel_size / 2
    assert report["outlier_fraction"] < 0.01


def test_map_error_examples():
    with pytest.raises(MappingError):
        map_error(GlobalMap(0.05), ROOM)

    on_face = GlobalMap(0.05).insert_points([[3.3, 1.2, 0.45]])
    assert map_error(on_face, ROOM) == {"mean_abs_m": 0.0, "p95_abs_m": 0.0, "outlier_fraction": 0.0}


def test_surface_distances():
    points = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.5], [3.3, 1.5, 0.8], [-1.0, 1.0, 0.0]])
    np.testing.assert_allclose(surface_distances(points, ROOM), [0.0, 0.5, 0.1, 1.0], atol=1e-12)


def test_top_view_and_pose_export(tmp_path):
    global_map = GlobalMap(0.1).insert_points([[0.05, 0.05, 0.0], [0.05, 0.05, 1.0], [0.25, 0.15, 0.0]])
    grid, origin = global_map.top_view(0.1)
    np.testing.assert_array_equal(grid, [[2, 0, 0], [0, 0, 1]])
    assert origin == (0.0, 0.0)
    write_top_view(tmp_path / "top.pgm", global_map, 0.1)
    assert (tmp_path / "top.pgm").exists()

    path = tmp_path / "poses.csv"
    write_refined_poses(path, [RefinedPose(0.5, Pose2(1.0, 2.0, 0.5), True, 0.01)])
    lines = path.read_text().splitlines()
    assert lines == ["timestamp,x,y,theta,converged,rmse", "0.5,1,2,0.5,1,0.01"]

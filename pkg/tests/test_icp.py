import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from exceptions import CorrespondenceError, MappingError
from geometry.transforms import rotation_angle
from mapping.icp import best_fit_transform, icp_register
from models import IcpParams, PointCloud, RigidTransform3


def box_world_cloud(rng, n=3000):
    """Points on the inside faces of a 4 x 3 x 2.5 m room and on a crate."""
    faces = []
    per = n // 6
    faces.append(np.column_stack([rng.uniform(0, 4, per), rng.uniform(0, 3, per), np.zeros(per)]))
    faces.append(np.column_stack([np.zeros(per), rng.uniform(0, 3, per), rng.uniform(0, 2.5, per)]))
    faces.append(np.column_stack([rng.uniform(0, 4, per), np.zeros(per), rng.uniform(0, 2.5, per)]))
    faces.append(np.column_stack([np.full(per, 4.0), rng.uniform(0, 3, per), rng.uniform(0, 2.5, per)]))
    faces.append(np.column_stack([rng.uniform(1, 2, per), np.full(per, 1.0), rng.uniform(0, 1, per)]))
    faces.append(np.column_stack([rng.uniform(1, 2, per), rng.uniform(1, 2, per), np.ones(per)]))
    return PointCloud(np.vstack(faces))


def random_motion(rng, max_translation=0.1, max_degrees=5.0):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = math.radians(rng.uniform(0, max_degrees))
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return RigidTransform3(Rotation.from_rotvec(axis * angle).as_matrix(),
                           direction * rng.uniform(0, max_translation))


def transform_error(a, b):
    delta = a.inverse() @ b
    return float(np.linalg.norm(delta.translation)), math.degrees(rotation_angle(delta.rotation))


def test_best_fit_recovers_exact_motion():
    rng = np.random.default_rng(0)
    src = rng.uniform(-1, 1, (100, 3))
    motion = random_motion(rng, 1.0, 40.0)
    fit = best_fit_transform(src, motion.apply(src))
    np.testing.assert_allclose(fit.rotation, motion.rotation, atol=1e-9)
    np.testing.assert_allclose(fit.translation, motion.translation, atol=1e-9)


def test_identical_clouds():
    cloud = box_world_cloud(np.random.default_rng(1), 600)
    result = icp_register(cloud, cloud)
    np.testing.assert_allclose(result.transform.as_matrix(), np.eye(4), atol=1e-9)
    assert result.converged
    assert result.iterations <= 2
    assert result.rmse == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("trials, required", [(10, 9), pytest.param(100, 98, marks=pytest.mark.slow)])
def test_recovers_small_motions(trials, required):
    passed = 0
    for seed in range(trials):
        rng = np.random.default_rng(100 + seed)
        source = box_world_cloud(rng)
        motion = random_motion(rng)
        target = source.transformed(motion)
        result = icp_register(source, target, params=IcpParams(max_iterations=100, convergence_eps=1e-7))
        translation, degrees = transform_error(result.transform, motion)
        passed += translation < 0.01 and degrees < 0.5

        history = np.array(result.history)
        assert np.all(np.diff(history) <= 1e-12)
        r = result.transform.rotation
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-9)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-9)
    assert passed >= required


def test_registration_is_equivariant():
    rng = np.random.default_rng(7)
    source = box_world_cloud(rng, 1200)
    motion = random_motion(rng)
    target = source.transformed(motion)
    common = random_motion(rng, 2.0, 90.0)

    plain = icp_register(source, target)
    moved = icp_register(source.transformed(common), target.transformed(common))
    conjugated = common @ plain.transform @ common.inverse()
    np.testing.assert_allclose(moved.transform.as_matrix(), conjugated.as_matrix(), atol=1e-6)


def test_disjoint_clouds_starve():
    rng = np.random.default_rng(2)
    source = PointCloud(rng.uniform(0, 1, (200, 3)))
    target = PointCloud(rng.uniform(10, 11, (200, 3)))
    with pytest.raises(CorrespondenceError):
        icp_register(source, target)


def test_too_few_points():
    with pytest.raises(MappingError):
        icp_register(PointCloud(np.zeros((2, 3))), PointCloud(np.zeros((5, 3))))

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from scipy.spatial.transform import Rotation

from octlio.config import EstimatorConfig
from octlio.errors import DegeneracyError, TrackingError
from octlio.geom import NavState, so3_exp, so3_log
from octlio.hknn import build_traversal_list
from octlio.octvox import OctVoxMap
from octlio.registration import (
    center_downsample,
    find_correspondences,
    iterated_update,
    random_downsample,
    residual_jacobians,
)
from octlio.synthbench import SceneSpec, SensorSpec, TrajectorySpec, synthesize_scan
from octlio.registration.estimator import FULL_DIM, NAV_DIM, _coupled_jacobians, _Iterate
from tests.registration.walls import corner, corner_map, floor

STEP = 1e-6


def offset_prior(angle_deg: float = 2.0, shift=(0.03, -0.04, 0.0)) -> NavState:
    axis = np.ones(3) / math.sqrt(3.0)
    state = NavState.at_rest()
    return replace(state, rot=so3_exp(axis * math.radians(angle_deg)), pos=np.array(shift))


def random_problem(seed: int):
    rng = np.random.default_rng(seed)
    rot = Rotation.from_rotvec(rng.normal(size=3))
    trans = rng.normal(size=3)
    points = rng.uniform(-5.0, 5.0, size=(20, 3))
    normals = rng.normal(size=(20, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.normal(size=20)
    return rot, trans, points, normals, offsets


class TestJacobians(TestCase):
    def test_pose_jacobian_matches_finite_differences(self):
        for seed in range(5):
            rot, trans, points, normals, offsets = random_problem(seed)
            _, jacobians = residual_jacobians(rot, trans, points, normals, offsets)
            numeric = np.zeros_like(jacobians)
            for axis in range(3):
                delta = np.zeros(3)
                delta[axis] = STEP
                plus, _ = residual_jacobians(rot * so3_exp(delta), trans, points, normals, offsets)
                minus, _ = residual_jacobians(rot * so3_exp(-delta), trans, points, normals, offsets)
                numeric[:, axis] = (plus - minus) / (2 * STEP)
                plus, _ = residual_jacobians(rot, trans + delta, points, normals, offsets)
                minus, _ = residual_jacobians(rot, trans - delta, points, normals, offsets)
                numeric[:, 3 + axis] = (plus - minus) / (2 * STEP)
            assert_allclose(numeric, jacobians, rtol=1e-5, atol=1e-7)

    def test_coupled_jacobian_matches_retraction(self):
        rot, trans, points, normals, offsets = random_problem(7)
        state = replace(NavState.at_rest(), rot=rot, pos=trans, vel=np.array([1.0, -0.5, 0.2]))
        dt = 0.1
        _, pose_jacobians = residual_jacobians(rot, trans, points, normals, offsets)
        jacobians = _coupled_jacobians(pose_jacobians, rot, dt)
        self.assertEqual((20, FULL_DIM), jacobians.shape)

        def residuals(delta):
            moved = _Iterate(state).retract(delta, dt).state
            return residual_jacobians(moved.rot, moved.pos, points, normals, offsets)[0]

        numeric = np.zeros_like(jacobians)
        for column in range(FULL_DIM):
            delta = np.zeros(FULL_DIM)
            delta[column] = STEP
            numeric[:, column] = (residuals(delta) - residuals(-delta)) / (2 * STEP)
        assert_allclose(numeric, jacobians, rtol=1e-5, atol=1e-7)

    def test_velocity_only_coupling_matches_retraction(self):
        rot, trans, points, normals, offsets = random_problem(8)
        state = replace(NavState.at_rest(), rot=rot, pos=trans, vel=np.array([0.3, 0.0, -0.2]))
        dt = 0.1
        _, pose_jacobians = residual_jacobians(rot, trans, points, normals, offsets)
        jacobians = _coupled_jacobians(pose_jacobians, rot, dt, full=False)
        self.assertEqual((20, NAV_DIM), jacobians.shape)

        def residuals(delta):
            moved = _Iterate(state).retract(delta, dt).state
            return residual_jacobians(moved.rot, moved.pos, points, normals, offsets)[0]

        numeric = np.zeros_like(jacobians)
        for column in range(NAV_DIM):
            delta = np.zeros(NAV_DIM)
            delta[column] = STEP
            numeric[:, column] = (residuals(delta) - residuals(-delta)) / (2 * STEP)
        assert_allclose(numeric, jacobians, rtol=1e-5, atol=1e-7)

    def test_residual_on_plane_is_zero(self):
        residuals, _ = residual_jacobians(
            Rotation.identity(), np.zeros(3), [[1.0, 2.0, 0.0]], [[0.0, 0.0, 1.0]], [0.0]
        )
        self.assertEqual(0.0, residuals[0])


class TestFindCorrespondences(TestCase):
    def test_planar_matches(self):
        voxel_map = corner_map()
        points = corner(0.6, 2.4, 0.2)
        correspondences, stats, touched = find_correspondences(
            voxel_map,
            build_traversal_list(0.875, 0.25),
            points,
            NavState.at_rest(),
            EstimatorConfig(),
        )
        self.assertEqual(len(points), len(correspondences))
        self.assertEqual(len(points), stats.queries)
        self.assertTrue(touched)
        for correspondence in correspondences:
            self.assertAlmostEqual(1.0, float(np.linalg.norm(correspondence.normal)), delta=1e-12)
            residual = correspondence.normal @ correspondence.p_body + correspondence.d
            self.assertAlmostEqual(0.0, float(residual), delta=1e-9)

    def test_empty_map(self):
        correspondences, stats, _ = find_correspondences(
            OctVoxMap(),
            build_traversal_list(0.875, 0.25),
            corner(0.6, 1.0, 0.2),
            NavState.at_rest(),
            EstimatorConfig(),
        )
        self.assertEqual([], correspondences)
        self.assertEqual(0, stats.candidates)


class TestIteratedUpdate(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.traversal = build_traversal_list(0.875, 0.25)
        cls.map = corner_map()
        cls.points = corner(0.6, 2.4, 0.2)

    def assertPoseNear(self, expected: NavState, actual: NavState, metres: float, degrees: float):
        self.assertLess(float(np.linalg.norm(actual.pos - expected.pos)), metres)
        angle = np.linalg.norm(so3_log(expected.rot.inv() * actual.rot))
        self.assertLess(math.degrees(float(angle)), degrees)

    def test_fixed_point(self):
        prior = NavState.at_rest()
        posterior, stats = iterated_update(prior, self.points, self.map, self.traversal)
        self.assertPoseNear(prior, posterior, 1e-9, 1e-7)
        self.assertEqual(len(self.points), stats.n_corr)
        self.assertFalse(stats.degenerate)

    def test_fixed_point_with_huber(self):
        prior = NavState.at_rest()
        config = EstimatorConfig(robust_kernel="huber")
        posterior, _ = iterated_update(prior, self.points, self.map, self.traversal, config)
        self.assertPoseNear(prior, posterior, 1e-9, 1e-7)

    def test_recovers_offset_pose(self):
        posterior, stats = iterated_update(
            offset_prior(), self.points, self.map, self.traversal
        )
        self.assertPoseNear(NavState.at_rest(), posterior, 1e-3, 0.05)
        self.assertLessEqual(stats.iterations, 4)
        self.assertGreater(stats.candidates, 0)
        self.assertTrue(stats.history[0].accepted)
        self.assertLess(stats.history[0].cost_after, stats.history[0].cost_before)
        for record in stats.history:
            if record.accepted:
                self.assertLessEqual(record.cost_after, record.cost_before)

    def test_iteration_callback(self):
        seen = []
        _, stats = iterated_update(
            offset_prior(),
            self.points,
            self.map,
            self.traversal,
            on_iteration=lambda index, state: seen.append(index),
        )
        self.assertEqual(len(stats.accepted_costs), len(seen))
        self.assertEqual(sorted(seen), seen)

    def test_threads_give_identical_results(self):
        prior = offset_prior()
        single, _ = iterated_update(prior, self.points, self.map, self.traversal)
        config = EstimatorConfig(num_threads=2)
        with ThreadPoolExecutor(max_workers=2) as executor:
            pooled, _ = iterated_update(
                prior, self.points, self.map, self.traversal, config, executor=executor
            )
        assert_array_equal(single.pos, pooled.pos)
        assert_array_equal(single.rot.as_quat(), pooled.rot.as_quat())

    def test_coupled_states(self):
        config = EstimatorConfig(estimate_bias_gravity=True)
        posterior, stats = iterated_update(
            offset_prior(), self.points, self.map, self.traversal, config, dt=0.1
        )
        self.assertPoseNear(NavState.at_rest(), posterior, 2e-3, 0.1)
        self.assertGreater(float(np.linalg.norm(posterior.vel)), 0.0)
        self.assertTrue(posterior.gravity_within())

    def test_velocity_follows_position_correction(self):
        shift = np.array([0.03, -0.04, 0.0])
        posterior, _ = iterated_update(
            offset_prior(shift=shift), self.points, self.map, self.traversal, dt=0.1
        )
        self.assertLess(float(posterior.vel @ shift), 0.0)
        self.assertTrue(posterior.gravity_within())
        assert_array_equal(NavState.at_rest().bias_acc, posterior.bias_acc)
        assert_array_equal(NavState.at_rest().bias_gyr, posterior.bias_gyr)

    def test_velocity_unobserved_without_interval(self):
        posterior, _ = iterated_update(offset_prior(), self.points, self.map, self.traversal)
        assert_allclose(np.zeros(3), posterior.vel, atol=1e-12)

    def test_tracking_lost(self):
        self.assertRaises(
            TrackingError,
            iterated_update,
            NavState.at_rest(),
            self.points,
            OctVoxMap(),
            self.traversal,
        )

    def test_too_few_correspondences(self):
        config = EstimatorConfig(min_correspondences=1000)
        self.assertRaises(
            TrackingError, iterated_update, NavState.at_rest(), self.points, self.map, self.traversal, config
        )


class TestDegenerateGeometry(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.traversal = build_traversal_list(0.875, 0.25)
        cls.map = OctVoxMap()
        cls.map.insert_scan(floor(0.0, 3.0, 0.05))
        cls.points = floor(0.6, 2.4, 0.2)

    def test_prior_holds_unobserved_directions(self):
        prior = NavState.at_rest()
        with self.assertLogs("octlio.registration.estimator", "WARNING"):
            posterior, stats = iterated_update(prior, self.points, self.map, self.traversal)
        self.assertTrue(stats.degenerate)
        assert_allclose(prior.pos, posterior.pos, atol=1e-9)

    def test_singular_without_prior(self):
        config = EstimatorConfig(prior_weight=0.0)
        self.assertRaises(
            DegeneracyError,
            iterated_update,
            NavState.at_rest(),
            self.points,
            self.map,
            self.traversal,
            config,
        )


class TestRoomScan(TestCase):
    """A scan registered against a map built from itself stays where it is."""

    @classmethod
    def setUpClass(cls):
        sensor = SensorSpec(range_sigma=0.0)
        scan = synthesize_scan(
            SceneSpec.room(), TrajectorySpec(kind="static", duration=1.0), 1.0, sensor
        )
        cls.points = center_downsample(random_downsample(scan.points, 3), 0.5)
        cls.map = OctVoxMap()
        cls.map.insert_scan(cls.points)
        # Noise-free scan: keep exact planes only.
        cls.config = EstimatorConfig(plane_flatness=1e-6)
        cls.traversal = build_traversal_list(cls.config.r_max, cls.map.subvoxel_size)

    def test_fixed_point(self):
        prior = NavState.at_rest()
        posterior, stats = iterated_update(
            prior, self.points, self.map, self.traversal, self.config
        )
        assert_allclose(prior.pos, posterior.pos, atol=1e-6)
        assert_allclose(prior.vel, posterior.vel, atol=1e-6)
        angle = float(np.linalg.norm(so3_log(prior.rot.inv() * posterior.rot)))
        self.assertLess(angle, 1e-6)
        self.assertGreaterEqual(stats.n_corr, self.config.min_correspondences)

    def test_edges_do_not_pass_as_planes(self):
        correspondences, stats, _ = find_correspondences(
            self.map, self.traversal, self.points, NavState.at_rest(), self.config
        )
        self.assertLess(len(correspondences), stats.queries)
        for correspondence in correspondences:
            residual = correspondence.normal @ correspondence.p_body + correspondence.d
            self.assertAlmostEqual(0.0, float(residual), delta=1e-9)

from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from octlio.errors import InputError, TimestampError
from octlio.geom import Pose
from octlio.synthbench import (
    associate,
    ate_rmse,
    relative_efficiency,
    rigid_alignment,
    summarize,
)


def track(times, positions):
    return [(t, Pose(Rotation.identity(), p)) for t, p in zip(times, positions)]


LINE = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0]])


class TestAssociate(TestCase):
    def test_nearest_in_time(self):
        est = [(0.104, [1.0, 0.0, 0.0]), (0.196, [2.0, 0.0, 0.0])]
        gt = [(0.0, [0.0, 0.0, 0.0]), (0.1, [1.0, 1.0, 1.0]), (0.2, [2.0, 2.0, 2.0])]
        est_p, gt_p = associate(est, gt)
        assert_allclose([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]], gt_p)
        assert_allclose([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], est_p)

    def test_outside_window_dropped(self):
        est_p, _ = associate([(0.5, [0.0, 0.0, 0.0])], [(0.0, [0.0, 0.0, 0.0])])
        self.assertEqual(0, len(est_p))

    def test_empty(self):
        est_p, gt_p = associate([], [(0.0, [0.0, 0.0, 0.0])])
        self.assertEqual((0, 3), est_p.shape)
        self.assertEqual((0, 3), gt_p.shape)


class TestAteRmse(TestCase):
    def test_identical(self):
        gt = track([0.0, 0.1, 0.2, 0.3], LINE)
        self.assertEqual(0.0, ate_rmse(gt, gt, align=False))

    def test_known_error(self):
        times = [0.0, 0.1, 0.2]
        gt = track(times, LINE[:3])
        est = track(times, LINE[:3] + [[0.0, 0.1, 0.0], [0.0, -0.1, 0.0], [0.0, 0.1, 0.0]])
        self.assertAlmostEqual(0.1, ate_rmse(est, gt, align=False), delta=1e-12)

    def test_offset_removed_by_alignment(self):
        times = [0.0, 0.1, 0.2, 0.3]
        gt = track(times, LINE)
        est = track(times, LINE + [1.0, 0.0, 0.0])
        self.assertAlmostEqual(1.0, ate_rmse(est, gt, align=False), delta=1e-12)
        self.assertAlmostEqual(0.0, ate_rmse(est, gt), delta=1e-9)

    def test_rigid_motion_removed_by_alignment(self):
        rotation = Rotation.from_euler("z", 90, degrees=True)
        times = [0.0, 0.1, 0.2, 0.3]
        est = track(times, rotation.apply(LINE) + [3.0, -2.0, 0.5])
        self.assertAlmostEqual(0.0, ate_rmse(est, track(times, LINE)), delta=1e-9)

    def test_scales_with_error(self):
        times = np.arange(10) * 0.1
        gt = track(times, np.column_stack([times, np.zeros(10), np.zeros(10)]))
        noise = np.random.default_rng(0).normal(size=(10, 3))
        small = ate_rmse(track(times, [p.trans + 0.01 * n for (_, p), n in zip(gt, noise)]), gt, align=False)
        large = ate_rmse(track(times, [p.trans + 0.02 * n for (_, p), n in zip(gt, noise)]), gt, align=False)
        self.assertAlmostEqual(2 * small, large, delta=1e-12)

    def test_plain_positions(self):
        gt = [(0.0, [0.0, 0.0, 0.0]), (1.0, [1.0, 0.0, 0.0])]
        self.assertEqual(0.0, ate_rmse(gt, gt, align=False))

    def test_too_few_pairs(self):
        gt = track([0.0, 0.1], LINE[:2])
        est = track([5.0, 6.0], LINE[:2])
        self.assertRaises(TimestampError, ate_rmse, est, gt)


class TestRigidAlignment(TestCase):
    def test_recovers_transform(self):
        rotation = Rotation.from_euler("xyz", [0.2, -0.4, 1.0])
        source = np.random.default_rng(1).normal(size=(20, 3))
        target = rotation.apply(source) + [1.0, 2.0, 3.0]
        matrix, translation = rigid_alignment(source, target)
        assert_allclose(rotation.as_matrix(), matrix, atol=1e-12)
        assert_allclose([1.0, 2.0, 3.0], translation, atol=1e-12)
        self.assertAlmostEqual(1.0, float(np.linalg.det(matrix)), delta=1e-12)


class TestRelativeEfficiency(TestCase):
    def test_single_frame(self):
        self.assertAlmostEqual(0.2, relative_efficiency([10.0], [0.5]))

    def test_mean_over_frames(self):
        self.assertAlmostEqual(0.15, relative_efficiency([10.0, 20.0], [0.5, 0.5]))

    def test_faster_is_better(self):
        slow = relative_efficiency([20.0, 30.0], [0.8, 0.6])
        fast = relative_efficiency([10.0, 15.0], [0.8, 0.6])
        self.assertAlmostEqual(2 * slow, fast)

    def test_invalid(self):
        self.assertRaises(InputError, relative_efficiency, [], [])
        self.assertRaises(InputError, relative_efficiency, [1.0], [0.5, 0.5])
        self.assertRaises(InputError, relative_efficiency, [0.0], [0.5])
        self.assertRaises(InputError, relative_efficiency, [1.0], [1.5])


class TestSummarize(TestCase):
    def test_with_timings(self):
        metrics = summarize(0.05, [10.0, 20.0], [0.5, 0.5], [100, 200])
        self.assertEqual(2, metrics.frames)
        self.assertAlmostEqual(0.15, metrics.eta)
        self.assertEqual(15.0, metrics.elapsed_mean_ms)
        self.assertEqual(5.0, metrics.elapsed_std_ms)
        self.assertEqual(150.0, metrics.candidates_mean)

    def test_without_timings(self):
        metrics = summarize(0.05, [0.0, 0.0], [0.0, 0.0], [100, 200])
        self.assertEqual(0.0, metrics.eta)
        self.assertEqual(2, metrics.frames)

    def test_report(self):
        lines = summarize(0.125, [10.0], [0.5], [7]).report().splitlines()
        self.assertEqual(
            [
                "frames=1",
                "ate_rmse=0.125000",
                "elapsed_mean_ms=10.000",
                "elapsed_std_ms=0.000",
                "eta=0.200000",
                "candidates_mean=7.000",
            ],
            lines,
        )

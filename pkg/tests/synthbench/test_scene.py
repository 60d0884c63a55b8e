import math
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from octlio.errors import InputError
from octlio.synthbench import Box, Plane, SceneSpec

ORIGIN = np.zeros((1, 3))


class TestCast(TestCase):
    def test_box_from_outside(self):
        scene = SceneSpec(boxes=(Box.of((1.0, -1.0, -1.0), (2.0, 1.0, 1.0)),))
        self.assertEqual(1.0, scene.cast(ORIGIN, [[1.0, 0.0, 0.0]])[0])
        self.assertEqual(math.inf, scene.cast(ORIGIN, [[-1.0, 0.0, 0.0]])[0])
        self.assertEqual(math.inf, scene.cast(ORIGIN, [[0.0, 1.0, 0.0]])[0])

    def test_box_from_inside(self):
        scene = SceneSpec(boxes=(Box.of((-5.0, -5.0, -1.0), (5.0, 5.0, 3.0)),))
        assert_allclose([5.0, 1.0, 3.0], scene.cast(np.zeros((3, 3)), [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]))

    def test_unbounded_plane(self):
        scene = SceneSpec(planes=(Plane.of((0.0, 0.0, -1.0), (0.0, 0.0, 2.0)),))
        self.assertEqual(1.0, scene.cast(ORIGIN, [[0.0, 0.0, -1.0]])[0])
        self.assertEqual(math.inf, scene.cast(ORIGIN, [[1.0, 0.0, 0.0]])[0])
        self.assertEqual(math.inf, scene.cast(ORIGIN, [[0.0, 0.0, 1.0]])[0])

    def test_disc(self):
        scene = SceneSpec(planes=(Plane.of((0.0, 0.0, -1.0), (0.0, 0.0, 1.0), 0.5),))
        down = [[0.0, 0.0, -1.0]]
        self.assertEqual(1.0, scene.cast(ORIGIN, down)[0])
        self.assertEqual(math.inf, scene.cast([[1.0, 0.0, 0.0]], down)[0])

    def test_nearest_surface_wins(self):
        scene = SceneSpec.room()
        self.assertAlmostEqual(1.0, scene.cast(ORIGIN, [[0.0, 0.0, -1.0]])[0])
        # The pillar stands in front of the far wall.
        self.assertAlmostEqual(1.0, scene.cast([[0.0, -0.5, 0.0]], [[1.0, 0.0, 0.0]])[0])

    def test_hits_lie_on_surfaces(self):
        scene = SceneSpec.room()
        directions = np.random.default_rng(0).normal(size=(500, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        origins = np.zeros((500, 3))
        distances = scene.cast(origins, directions)
        self.assertTrue(np.all(np.isfinite(distances)))
        hits = origins + distances[:, None] * directions
        self.assertLess(float(scene.surface_distance(hits).max()), 1e-9)


class TestSurfaceDistance(TestCase):
    def test_room_center(self):
        self.assertAlmostEqual(1.0, float(SceneSpec.room().surface_distance(ORIGIN)[0]))

    def test_outside_box(self):
        scene = SceneSpec(boxes=(Box.of((1.0, 1.0, 1.0), (2.0, 2.0, 2.0)),))
        self.assertAlmostEqual(math.sqrt(3.0), float(scene.surface_distance(ORIGIN)[0]))

    def test_disc_rim(self):
        scene = SceneSpec(planes=(Plane.of((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), 1.0),))
        self.assertAlmostEqual(5.0, float(scene.surface_distance([[4.0, 0.0, 4.0]])[0]))


class TestValidation(TestCase):
    def test_empty_scene(self):
        self.assertRaises(InputError, SceneSpec)

    def test_inverted_box(self):
        self.assertRaises(InputError, Box.of, (1.0, 0.0, 0.0), (0.0, 1.0, 1.0))

    def test_zero_normal(self):
        self.assertRaises(InputError, Plane.of, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

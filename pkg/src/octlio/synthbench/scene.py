"""
Analytic scenes of axis-aligned boxes and planes, with a vectorized ray
caster.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import InputError

# Smallest accepted hit distance, in meters.
HIT_EPSILON = 1e-9


class Box(NamedTuple):
    """An axis-aligned box [lower, upper]."""

    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def of(cls, lower, upper) -> "Box":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != (3,) or upper.shape != (3,) or np.any(upper <= lower):
            raise InputError("Box needs lower < upper on every axis.")
        return cls(lower, upper)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.all((points > self.lower) & (points < self.upper), axis=1)


class Plane(NamedTuple):
    """
    A plane through point with unit normal, clipped to a disc of the given
    radius around point; an infinite radius keeps it unbounded.
    """

    point: np.ndarray
    normal: np.ndarray
    radius: float = math.inf

    @classmethod
    def of(cls, point, normal, radius: float = math.inf) -> "Plane":
        normal = np.asarray(normal, dtype=float)
        length = np.linalg.norm(normal)
        if length == 0:
            raise InputError("Plane normal must be nonzero.")
        return cls(np.asarray(point, dtype=float), normal / length, float(radius))


def _cast_box(box: Box, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (box.lower - origins) / directions
        t2 = (box.upper - origins) / directions
    t_near = np.fmax.reduce(np.fmin(t1, t2), axis=1)
    t_far = np.fmin.reduce(np.fmax(t1, t2), axis=1)
    hit = np.full(len(origins), np.inf)
    crossing = t_far >= np.maximum(t_near, 0.0)
    outside = crossing & (t_near > HIT_EPSILON)
    # Origins inside the box see its far side.
    inside = crossing & ~outside & (t_far > HIT_EPSILON)
    hit[outside] = t_near[outside]
    hit[inside] = t_far[inside]
    return hit


def _cast_plane(plane: Plane, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    facing = directions @ plane.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((plane.point - origins) @ plane.normal) / facing
    valid = (np.abs(facing) > 1e-12) & (t > HIT_EPSILON)
    if math.isfinite(plane.radius):
        spot = origins + np.where(valid, t, 0.0)[:, None] * directions
        valid &= np.linalg.norm(spot - plane.point, axis=1) <= plane.radius
    return np.where(valid, t, np.inf)


@dataclass(frozen=True, eq=False)
class SceneSpec:
    """
    Surfaces the simulated sensor can see.

    :ivar boxes: solid boxes; a ray starting inside one hits its far wall.
    :ivar planes: planes, optionally clipped to discs.
    """

    boxes: tuple[Box, ...] = ()
    planes: tuple[Plane, ...] = ()

    def __post_init__(self) -> None:
        if not self.boxes and not self.planes:
            raise InputError("A scene needs at least one surface.")

    @classmethod
    def room(cls, half_extent: float = 5.0, floor: float = -1.0, ceiling: float = 3.0) -> "SceneSpec":
        """
        A closed room with a pillar and a low box in one corner.
        """
        room = Box.of((-half_extent, -half_extent, floor), (half_extent, half_extent, ceiling))
        pillar = Box.of((1.0, -0.8, floor), (1.6, -0.2, ceiling))
        crate = Box.of(
            (-half_extent + 0.5, half_extent - 1.5, floor),
            (-half_extent + 1.5, half_extent - 0.5, floor + 1.0),
        )
        return cls(boxes=(room, pillar, crate))

    def cast(self, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """
        Distance along each unit direction to the nearest surface.

        :param origins: (N, 3) ray origins.
        :param directions: (N, 3) unit directions.
        :return: (N,) distances, inf where nothing is hit.
        """
        origins = np.asarray(origins, dtype=float).reshape(-1, 3)
        directions = np.asarray(directions, dtype=float).reshape(-1, 3)
        nearest = np.full(len(origins), np.inf)
        for box in self.boxes:
            nearest = np.minimum(nearest, _cast_box(box, origins, directions))
        for plane in self.planes:
            nearest = np.minimum(nearest, _cast_plane(plane, origins, directions))
        return nearest

    def surface_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearest surface."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        nearest = np.full(len(points), np.inf)
        for box in self.boxes:
            below = box.lower - points
            above = points - box.upper
            outside = np.linalg.norm(np.maximum(np.maximum(below, above), 0.0), axis=1)
            depth = np.minimum(-below, -above).min(axis=1)
            distance = np.where(box.contains(points), depth, outside)
            nearest = np.minimum(nearest, distance)
        for plane in self.planes:
            relative = points - plane.point
            height = relative @ plane.normal
            if math.isfinite(plane.radius):
                radial = np.linalg.norm(relative - height[:, None] * plane.normal, axis=1)
                overshoot = np.maximum(radial - plane.radius, 0.0)
                distance = np.sqrt(height * height + overshoot * overshoot)
            else:
                distance = np.abs(height)
            nearest = np.minimum(nearest, distance)
        return nearest

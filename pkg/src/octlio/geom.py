"""
Geometric primitives shared by every module: 3-vectors, rotations, rigid
transforms and the navigation state.

Vectors are ``numpy`` float arrays of shape (3,) and point sets are arrays of
shape (N, 3). Rotations are ``scipy.spatial.transform.Rotation`` values, which
are immutable, so every type here can be shared freely between threads.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InputError

Vec3 = np.ndarray

SMALL_ANGLE = 1e-8
STANDARD_GRAVITY = 9.81


def vec3(values: Sequence[float] | np.ndarray) -> Vec3:
    """
    Return a read-only float vector of shape (3,).

    :param values: three finite components.
    :raise InputError: if the input does not have three finite components.
    """
    array = np.array(values, dtype=float)
    if array.shape != (3,):
        raise InputError("Expected 3 components, got shape {}.".format(array.shape))
    if not np.all(np.isfinite(array)):
        raise InputError("Vector components must be finite: {}.".format(array))
    array.flags.writeable = False
    return array


def skew(v: Vec3) -> np.ndarray:
    """Return the 3x3 cross-product matrix of v."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def renormalize(rot: Rotation) -> Rotation:
    """Return rot rebuilt from its unit quaternion."""
    return Rotation.from_quat(rot.as_quat())


def so3_exp(omega: Vec3) -> Rotation:
    """
    Rodrigues exponential of a rotation vector.

    Below SMALL_ANGLE the quaternion is built from its second-order Taylor
    expansion.

    :param omega: rotation vector in radians.
    :return: the rotation exp([omega]x).
    """
    omega = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(omega)):
        raise InputError("Rotation vector must be finite: {}.".format(omega))
    angle = float(np.linalg.norm(omega))
    if angle < SMALL_ANGLE:
        half = 0.5 * omega
        return Rotation.from_quat([half[0], half[1], half[2], 1.0 - angle * angle / 8.0])
    return Rotation.from_rotvec(omega)


def so3_log(rot: Rotation) -> Vec3:
    """
    Inverse of :func:`so3_exp` on rotation angles in [0, pi].

    :param rot: a rotation.
    :return: its rotation vector in radians.
    """
    return rot.as_rotvec()


@dataclass(frozen=True, eq=False)
class Pose:
    """
    A rigid transform x -> rot * x + trans.
    """

    rot: Rotation
    trans: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "trans", vec3(self.trans))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Rotation.identity(), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        """Build a pose from a homogeneous 4x4 matrix."""
        matrix = np.asarray(matrix, dtype=float)
        return cls(Rotation.from_matrix(matrix[:3, :3]), matrix[:3, 3])

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rot.as_matrix()
        matrix[:3, 3] = self.trans
        return matrix

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Apply the transform to an (N, 3) array of points."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return points @ self.rot.as_matrix().T + self.trans

    def __repr__(self) -> str:
        return "Pose(quat={q}, trans={t})".format(
            q=np.round(self.rot.as_quat(), 9), t=np.round(self.trans, 9)
        )


def compose(a: Pose, b: Pose) -> Pose:
    """Return the pose a * b; the quaternion is re-normalized."""
    return Pose(renormalize(a.rot * b.rot), a.rot.apply(b.trans) + a.trans)


def invert(a: Pose) -> Pose:
    inverse = a.rot.inv()
    return Pose(inverse, -inverse.apply(a.trans))


def transform_point(a: Pose, p: Vec3) -> Vec3:
    return a.rot.apply(np.asarray(p, dtype=float)) + a.trans


def interpolate_pose(a: Pose, b: Pose, alpha: float) -> Pose:
    """
    Interpolate between two poses: geodesic on SO(3), linear on translation.

    :param alpha: 0 returns a, 1 returns b.
    """
    delta = so3_log(a.rot.inv() * b.rot)
    rot = renormalize(a.rot * so3_exp(alpha * delta))
    return Pose(rot, (1.0 - alpha) * a.trans + alpha * b.trans)


@dataclass(frozen=True, eq=False)
class NavState:
    """
    Full navigation state: attitude and position of the IMU in the world,
    world velocity, accelerometer and gyroscope biases, and world gravity.
    """

    rot: Rotation
    pos: Vec3
    vel: Vec3
    bias_acc: Vec3
    bias_gyr: Vec3
    gravity: Vec3

    def __post_init__(self) -> None:
        for name in ("pos", "vel", "bias_acc", "bias_gyr", "gravity"):
            object.__setattr__(self, name, vec3(getattr(self, name)))

    @classmethod
    def at_rest(
        cls, gravity: Sequence[float] = (0.0, 0.0, -STANDARD_GRAVITY)
    ) -> "NavState":
        """Identity attitude at the origin, zero velocity and biases."""
        zero = np.zeros(3)
        return cls(Rotation.identity(), zero, zero, zero, zero, np.asarray(gravity))

    @property
    def pose(self) -> Pose:
        return Pose(self.rot, self.pos)

    def with_pose(self, pose: Pose) -> "NavState":
        return replace(self, rot=pose.rot, pos=pose.trans)

    def gravity_within(
        self, nominal: float = STANDARD_GRAVITY, tolerance: float = 0.5
    ) -> bool:
        """Return True if the gravity magnitude lies in nominal +/- tolerance."""
        return abs(float(np.linalg.norm(self.gravity)) - nominal) <= tolerance


class ImuSample(NamedTuple):
    """One IMU reading: time (s), specific force (m/s^2), angular rate (rad/s)."""

    t: float
    acc: Vec3
    gyr: Vec3


class RawPoint(NamedTuple):
    """A LiDAR return in the sensor frame with its offset from the scan start."""

    p: Vec3
    t_off: float


@dataclass(frozen=True, eq=False)
class Scan:
    """
    One LiDAR sweep anchored at its end time.

    :ivar t_end: anchor time of the scan in seconds.
    :ivar points: (N, 3) sensor-frame points.
    :ivar t_off: (N,) offsets from the scan start, within [0, duration].
    :ivar duration: length of the sweep in seconds.
    """

    t_end: float
    points: np.ndarray
    t_off: np.ndarray
    duration: float

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        t_off = np.asarray(self.t_off, dtype=float).reshape(-1)
        if len(points) != len(t_off):
            raise InputError(
                "Scan has {n} points but {m} offsets.".format(n=len(points), m=len(t_off))
            )
        if not np.all(np.isfinite(points)):
            raise InputError("Scan points must be finite.")
        if self.duration <= 0:
            raise InputError("Scan duration must be positive.")
        if len(t_off) and (t_off.min() < -1e-9 or t_off.max() > self.duration + 1e-9):
            raise InputError("Point time offsets must lie within the scan window.")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "t_off", t_off)

    @classmethod
    def from_raw_points(
        cls, t_end: float, raw_points: Sequence[RawPoint], duration: float
    ) -> "Scan":
        points = np.array([raw.p for raw in raw_points], dtype=float).reshape(-1, 3)
        t_off = np.array([raw.t_off for raw in raw_points], dtype=float)
        return cls(t_end, points, t_off, duration)

    @property
    def t_start(self) -> float:
        return self.t_end - self.duration

    @property
    def timestamps(self) -> np.ndarray:
        """Absolute time of every point."""
        return self.t_start + self.t_off

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[RawPoint]:
        for p, t_off in zip(self.points, self.t_off):
            yield RawPoint(p, float(t_off))

"""
Closed-form ground-truth trajectories.

Every trajectory rests for a lead time, then its phase angle accelerates
along a cubic ease-in to the nominal angular frequency 2 pi / period and
keeps it. Position, velocity, acceleration, yaw and yaw rate are analytic,
so IMU readings can be synthesized exactly. Attitude is yaw only.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import ConfigError
from ..geom import Pose

KINDS = ("static", "line", "circle", "figure8")


class Kinematics(NamedTuple):
    """Sampled ground truth; rows follow the requested times."""

    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    yaw: np.ndarray
    yaw_rate: np.ndarray

    def rotations(self) -> Rotation:
        return Rotation.from_euler("z", self.yaw)


@dataclass(frozen=True)
class TrajectorySpec:
    """
    :ivar kind: one of static, line, circle, figure8.
    :ivar radius: size of the path in meters.
    :ivar period: time of one cycle at full speed, in seconds.
    :ivar height: constant z of the path.
    :ivar duration: length of the trajectory in seconds.
    :ivar lead: initial time at rest.
    :ivar ramp: time to reach full speed.
    """

    kind: str = "circle"
    radius: float = 3.0
    period: float = 10.0
    height: float = 0.0
    duration: float = 20.0
    lead: float = 1.0
    ramp: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(
                "Unknown trajectory kind '{kind}'; expected one of {kinds}.".format(
                    kind=self.kind, kinds=", ".join(KINDS)
                )
            )
        if self.radius < 0 or self.period <= 0 or self.duration <= 0:
            raise ConfigError("Trajectory needs radius >= 0, period > 0 and duration > 0.")
        if self.lead < 0 or self.ramp <= 0:
            raise ConfigError("Trajectory needs lead >= 0 and ramp > 0.")

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi / self.period

    def phase(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Phase angle and its first two time derivatives."""
        omega = self.angular_frequency
        tau = np.asarray(t, dtype=float) - self.lead
        u = np.clip(tau / self.ramp, 0.0, 1.0)
        ramping = (tau > 0) & (tau < self.ramp)
        cruising = tau >= self.ramp
        theta = np.where(
            cruising,
            omega * (0.5 * self.ramp + (tau - self.ramp)),
            omega * self.ramp * (u**3 - 0.5 * u**4),
        )
        theta_dot = np.where(cruising, omega, omega * (3 * u**2 - 2 * u**3))
        theta_ddot = np.where(ramping, omega * (6 * u - 6 * u**2) / self.ramp, 0.0)
        if self.kind == "static":
            zero = np.zeros_like(theta)
            return zero, zero, zero
        return theta, theta_dot, theta_ddot

    def _curve(self, theta: np.ndarray):
        """Path point and its first two derivatives with respect to theta."""
        r = self.radius
        zero = np.zeros_like(theta)
        sin, cos = np.sin(theta), np.cos(theta)
        match self.kind:
            case "static":
                c = (zero, zero, zero)
                d1 = (zero, zero, zero)
                d2 = (zero, zero, zero)
            case "line":
                c = (r * sin, zero, zero)
                d1 = (r * cos, zero, zero)
                d2 = (-r * sin, zero, zero)
            case "circle":
                c = (r * cos, r * sin, zero)
                d1 = (-r * sin, r * cos, zero)
                d2 = (-r * cos, -r * sin, zero)
            case "figure8":
                sin2, cos2 = np.sin(2 * theta), np.cos(2 * theta)
                c = (r * sin, 0.5 * r * sin2, zero)
                d1 = (r * cos, r * cos2, zero)
                d2 = (-r * sin, -2 * r * sin2, zero)
        return np.stack(c, axis=-1), np.stack(d1, axis=-1), np.stack(d2, axis=-1)

    def kinematics(self, times) -> Kinematics:
        """Sample the trajectory at the given times."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        theta, theta_dot, theta_ddot = self.phase(times)
        c, d1, d2 = self._curve(theta)
        pos = c + np.array([0.0, 0.0, self.height])
        vel = d1 * theta_dot[:, None]
        acc = d2 * (theta_dot**2)[:, None] + d1 * theta_ddot[:, None]
        match self.kind:
            case "circle":
                yaw = theta + 0.5 * math.pi
                yaw_rate = theta_dot
            case "figure8":
                yaw = np.arctan2(d1[:, 1], d1[:, 0])
                cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
                speed_sq = d1[:, 0] ** 2 + d1[:, 1] ** 2
                yaw_rate = cross / speed_sq * theta_dot
            case _:
                yaw = np.zeros_like(theta)
                yaw_rate = np.zeros_like(theta)
        return Kinematics(times, pos, vel, acc, yaw, yaw_rate)

    def pose(self, t: float) -> Pose:
        state = self.kinematics([t])
        return Pose(Rotation.from_euler("z", state.yaw[0]), state.pos[0])

    def poses(self, times) -> list[tuple[float, Pose]]:
        state = self.kinematics(times)
        rotations = state.rotations()
        return [
            (float(t), Pose(rotations[i], state.pos[i])) for i, t in enumerate(state.t)
        ]

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, ConfigError
from ..geom import STANDARD_GRAVITY, ImuSample, Pose, Scan, compose, vec3
from .scene import SceneSpec
from .trajectory import TrajectorySpec


@dataclass(frozen=True, eq=False)
class SensorSpec:
    """
    A spinning multi-channel LiDAR rigidly mounted next to an IMU.

    Rays sweep one full revolution per scan; ray i fires at offset
    i * period / (rays - 1) on channel i mod channels, with the channels'
    elevations spread evenly over the vertical field of view.

    :ivar fov: vertical field of view in degrees, centered on the horizon.
    :ivar extrinsic: sensor-to-IMU transform.
    """

    scan_rate: float = 10.0
    imu_rate: float = 200.0
    rays: int = 2000
    channels: int = 16
    fov: float = 60.0
    max_range: float = 50.0
    range_sigma: float = 0.01
    accel_sigma: float = 0.01
    gyro_sigma: float = 0.001
    accel_bias: np.ndarray = field(default_factory=lambda: vec3((0.0, 0.0, 0.0)))
    gyro_bias: np.ndarray = field(default_factory=lambda: vec3((0.0, 0.0, 0.0)))
    gravity: np.ndarray = field(default_factory=lambda: vec3((0.0, 0.0, -STANDARD_GRAVITY)))
    extrinsic: Pose = field(default_factory=Pose.identity)

    def __post_init__(self) -> None:
        if self.scan_rate <= 0 or self.imu_rate <= 0:
            raise ConfigError("Sensor rates must be positive.")
        if self.rays < 2 or self.channels < 1:
            raise ConfigError("A scan needs at least two rays and one channel.")
        if min(self.range_sigma, self.accel_sigma, self.gyro_sigma) < 0:
            raise ConfigError("Noise levels must be non-negative.")
        for name in ("accel_bias", "gyro_bias", "gravity"):
            object.__setattr__(self, name, vec3(getattr(self, name)))

    @property
    def scan_period(self) -> float:
        return 1.0 / self.scan_rate

    def directions(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit ray directions in the sensor frame and their time offsets."""
        index = np.arange(self.rays)
        azimuth = 2.0 * math.pi * index / self.rays
        half = math.radians(0.5 * self.fov)
        if self.channels == 1:
            levels = np.zeros(1)
        else:
            levels = np.linspace(-half, half, self.channels)
        elevation = levels[index % self.channels]
        directions = np.column_stack(
            [
                np.cos(elevation) * np.cos(azimuth),
                np.cos(elevation) * np.sin(azimuth),
                np.sin(elevation),
            ]
        )
        t_off = index * self.scan_period / (self.rays - 1)
        return directions, t_off


def scan_times(trajectory: TrajectorySpec, sensor: SensorSpec) -> np.ndarray:
    """End times k / scan_rate of every complete scan within the trajectory."""
    count = math.floor(trajectory.duration * sensor.scan_rate + 1e-9)
    return np.arange(1, count + 1) / sensor.scan_rate


def synthesize_scan(
    scene: SceneSpec,
    trajectory: TrajectorySpec,
    t_k: float,
    sensor: SensorSpec | None = None,
    seed: int = 0,
) -> Scan:
    """
    Render the sweep ending at t_k.

    Each ray is cast from the true sensor pose at its own firing time, so a
    moving platform produces a skewed scan. Ranges get Gaussian noise; rays
    that hit nothing within max_range are dropped.

    :raise ArgumentError: if the sweep does not lie within the trajectory.
    """
    sensor = sensor or SensorSpec()
    period = sensor.scan_period
    if t_k < period - 1e-9 or t_k > trajectory.duration + 1e-9:
        raise ArgumentError(
            "Scan end {t:.9f} is outside [{lo:.9f}, {hi:.9f}].".format(
                t=t_k, lo=period, hi=trajectory.duration
            )
        )
    rng = np.random.default_rng(seed)
    directions, t_off = sensor.directions()
    noise = rng.normal(0.0, sensor.range_sigma, size=len(directions))

    state = trajectory.kinematics(t_k - period + t_off)
    rotations = state.rotations() * sensor.extrinsic.rot
    origins = state.rotations().apply(sensor.extrinsic.trans) + state.pos
    distances = scene.cast(origins, rotations.apply(directions))
    hit = np.isfinite(distances) & (distances <= sensor.max_range)
    ranges = distances[hit] + noise[hit]
    points = directions[hit] * ranges[:, None]
    return Scan(float(t_k), points, t_off[hit], period)


def synthesize_imu(
    trajectory: TrajectorySpec,
    sensor: SensorSpec | None = None,
    seed: int = 0,
) -> list[ImuSample]:
    """
    Sample the IMU at imu_rate over the whole trajectory.

    The accelerometer measures R^T (a - g) and the gyroscope the body rate,
    each plus a constant bias and white Gaussian noise.
    """
    sensor = sensor or SensorSpec()
    count = math.floor(trajectory.duration * sensor.imu_rate + 1e-9) + 1
    times = np.arange(count) / sensor.imu_rate
    state = trajectory.kinematics(times)
    rotations = state.rotations()
    rng = np.random.default_rng(seed)
    acc_noise = rng.normal(0.0, sensor.accel_sigma, size=(count, 3))
    gyr_noise = rng.normal(0.0, sensor.gyro_sigma, size=(count, 3))

    acc = rotations.inv().apply(state.acc - sensor.gravity) + sensor.accel_bias + acc_noise
    rates = np.zeros((count, 3))
    rates[:, 2] = state.yaw_rate
    gyr = rates + sensor.gyro_bias + gyr_noise
    return [ImuSample(float(t), acc[i], gyr[i]) for i, t in enumerate(times)]


def sensor_pose(trajectory: TrajectorySpec, sensor: SensorSpec, t: float) -> Pose:
    """True pose of the LiDAR in the world at time t."""
    return compose(trajectory.pose(t), sensor.extrinsic)

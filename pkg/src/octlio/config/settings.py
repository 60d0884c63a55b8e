from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..geom import STANDARD_GRAVITY, Pose, vec3

ROBUST_KERNELS = ("none", "huber")
RANDOM_MODES = ("stride", "uniform")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class MapConfig:
    """
    Settings of the OctVox map.

    :ivar voxel_size: voxel edge length r_v in meters.
    :ivar tau_merge: gate distance for merging a point into a representative.
    :ivar n_max: a representative stops merging once its counter exceeds this.
    :ivar capacity: maximum number of live voxels before LRU eviction.
    :ivar world_bound: absolute bound on voxel key components.
    """

    voxel_size: float = 0.5
    tau_merge: float = 0.1
    n_max: int = 100
    capacity: int = 2_000_000
    world_bound: int = 2**31

    def __post_init__(self) -> None:
        _require(self.voxel_size > 0, "voxel_size must be positive.")
        _require(self.tau_merge >= 0, "tau_merge must be non-negative.")
        _require(self.n_max >= 1, "n_max must be at least 1.")
        _require(self.capacity >= 1, "capacity must be at least 1.")
        _require(self.world_bound >= 1, "world_bound must be at least 1.")

    @property
    def subvoxel_size(self) -> float:
        """Subvoxel edge length r_s = r_v / 2."""
        return 0.5 * self.voxel_size


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Settings of scan preprocessing, correspondence search and the iterated
    update.
    """

    max_iter: int = 4
    knn_k: int = 5
    knn_radius: float = 0.875
    r_max: float = 0.875
    plane_thresh: float = 0.1
    plane_flatness: float = 0.005
    downsample_res: float = 0.5
    random_rate: int = 3
    random_mode: str = "stride"
    converge_eps: float = 1e-4
    prior_weight: float = 1e3
    meas_sigma: float = 0.01
    min_correspondences: int = 10
    robust_kernel: str = "none"
    huber_delta: float = 0.05
    damping: float = 1e-6
    estimate_bias_gravity: bool = False
    extra_prior_weight: float = 1e2
    early_termination: bool = True
    materialize_octants: bool = False
    num_threads: int = 1
    min_range: float = 0.1
    max_range: float = 100.0

    def __post_init__(self) -> None:
        _require(self.max_iter >= 1, "max_iter must be at least 1.")
        _require(self.knn_k >= 3, "knn_k must be at least 3 to fit a plane.")
        _require(self.knn_radius > 0, "knn_radius must be positive.")
        _require(
            self.knn_radius <= self.r_max,
            "knn_radius ({r}) must not exceed r_max ({m}).".format(
                r=self.knn_radius, m=self.r_max
            ),
        )
        _require(self.plane_thresh > 0, "plane_thresh must be positive.")
        _require(self.plane_flatness > 0, "plane_flatness must be positive.")
        _require(self.downsample_res > 0, "downsample_res must be positive.")
        _require(self.random_rate >= 1, "random_rate must be at least 1.")
        _require(
            self.random_mode in RANDOM_MODES,
            "random_mode must be one of {}.".format(", ".join(RANDOM_MODES)),
        )
        _require(self.converge_eps > 0, "converge_eps must be positive.")
        _require(self.prior_weight >= 0, "prior_weight must be non-negative.")
        _require(self.meas_sigma > 0, "meas_sigma must be positive.")
        _require(self.min_correspondences >= 1, "min_correspondences must be positive.")
        _require(
            self.robust_kernel in ROBUST_KERNELS,
            "robust_kernel must be one of {}.".format(", ".join(ROBUST_KERNELS)),
        )
        _require(self.huber_delta > 0, "huber_delta must be positive.")
        _require(self.damping >= 0, "damping must be non-negative.")
        _require(self.extra_prior_weight > 0, "extra_prior_weight must be positive.")
        _require(self.num_threads >= 1, "num_threads must be at least 1.")
        _require(0 <= self.min_range < self.max_range, "Need 0 <= min_range < max_range.")


@dataclass(frozen=True, eq=False)
class OdometryConfig:
    """
    Settings of the full odometry pipeline.

    :ivar extrinsic: LiDAR-to-IMU transform, fixed.
    :ivar gravity_init: world gravity used before and during initialization;
        its magnitude is the nominal value for the gravity check.
    :ivar imu_init_window: length of the static IMU window in seconds.
    :ivar init_acc_var_max: accelerometer variance above which the init
        window is considered moving.
    :ivar timing: when False every timing value is reported as zero.
    """

    extrinsic: Pose = field(default_factory=Pose.identity)
    map: MapConfig = field(default_factory=MapConfig)
    est: EstimatorConfig = field(default_factory=EstimatorConfig)
    gravity_init: np.ndarray = field(
        default_factory=lambda: vec3((0.0, 0.0, -STANDARD_GRAVITY))
    )
    gravity_tolerance: float = 0.5
    imu_init_window: float = 1.0
    init_acc_var_max: float = 0.05
    seed: int = 0
    timing: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "gravity_init", vec3(self.gravity_init))
        _require(self.gravity_tolerance >= 0, "gravity_tolerance must be non-negative.")
        _require(self.imu_init_window > 0, "imu_init_window must be positive.")
        _require(self.init_acc_var_max > 0, "init_acc_var_max must be positive.")

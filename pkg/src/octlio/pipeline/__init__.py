"""The odometry loop: propagation, compensation, registration and mapping."""

from .imu import initialize_from_static, interpolate_sample, propagate_imu
from .odometry import PHASES, FrameResult, Odometry
from .trajectory import format_pose, read_trajectory, write_trajectory

__all__ = [
    "PHASES",
    "FrameResult",
    "Odometry",
    "format_pose",
    "initialize_from_static",
    "interpolate_sample",
    "propagate_imu",
    "read_trajectory",
    "write_trajectory",
]

"""Synthetic scenes, sensors and trajectories, dataset files and evaluation."""

from .bench import KnnBenchReport, QueryRecord, bench_knn
from .io import (
    METRICS_HEADER,
    TIMING_HEADER,
    read_dataset,
    read_groundtruth,
    read_imu,
    read_metrics,
    read_scan,
    read_timing,
    write_dataset,
    write_imu,
    write_metrics,
    write_scan,
    write_timing,
)
from .metrics import Metrics, associate, ate_rmse, relative_efficiency, rigid_alignment, summarize
from .scene import Box, Plane, SceneSpec
from .sensor import SensorSpec, scan_times, sensor_pose, synthesize_imu, synthesize_scan
from .trajectory import KINDS, Kinematics, TrajectorySpec

__all__ = [
    "KINDS",
    "METRICS_HEADER",
    "TIMING_HEADER",
    "Box",
    "Kinematics",
    "KnnBenchReport",
    "Metrics",
    "Plane",
    "QueryRecord",
    "SceneSpec",
    "SensorSpec",
    "TrajectorySpec",
    "associate",
    "ate_rmse",
    "bench_knn",
    "read_dataset",
    "read_groundtruth",
    "read_imu",
    "read_metrics",
    "read_scan",
    "read_timing",
    "relative_efficiency",
    "rigid_alignment",
    "scan_times",
    "sensor_pose",
    "summarize",
    "synthesize_imu",
    "synthesize_scan",
    "write_dataset",
    "write_imu",
    "write_metrics",
    "write_scan",
    "write_timing",
]

"""Scan preprocessing, plane fitting and the iterated point-to-plane update."""

from .estimator import (
    Correspondence,
    IterationRecord,
    UpdateStats,
    find_correspondences,
    iterated_update,
    residual_jacobians,
)
from .plane import PlaneFit, fit_plane, fit_planes
from .preprocess import (
    center_downsample,
    crop_range,
    deskew_scan,
    interpolate_track,
    random_downsample,
)

__all__ = [
    "Correspondence",
    "IterationRecord",
    "PlaneFit",
    "UpdateStats",
    "center_downsample",
    "crop_range",
    "deskew_scan",
    "find_correspondences",
    "fit_plane",
    "fit_planes",
    "interpolate_track",
    "iterated_update",
    "random_downsample",
    "residual_jacobians",
]

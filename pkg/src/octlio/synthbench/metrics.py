import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, TimestampError
from ..geom import Pose

logger = logging.getLogger(__name__)

# Largest time difference, in seconds, for two poses to be associated.
MAX_TIME_DIFFERENCE = 0.01


def _positions(trajectory: Sequence) -> tuple[np.ndarray, np.ndarray]:
    times = np.array([float(t) for t, _ in trajectory])
    positions = np.array(
        [pose.trans if isinstance(pose, Pose) else np.asarray(pose, dtype=float) for _, pose in trajectory]
    ).reshape(-1, 3)
    return times, positions


def associate(
    est: Sequence, gt: Sequence, max_dt: float = MAX_TIME_DIFFERENCE
) -> tuple[np.ndarray, np.ndarray]:
    """
    Pair every estimated position with the ground-truth position closest in
    time, dropping pairs further apart than max_dt.

    :return: matched (M, 3) estimated and ground-truth positions.
    """
    est_t, est_p = _positions(est)
    gt_t, gt_p = _positions(gt)
    if len(est_t) == 0 or len(gt_t) == 0:
        return np.zeros((0, 3)), np.zeros((0, 3))
    order = np.argsort(gt_t, kind="stable")
    gt_t, gt_p = gt_t[order], gt_p[order]
    right = np.clip(np.searchsorted(gt_t, est_t), 0, len(gt_t) - 1)
    left = np.clip(right - 1, 0, len(gt_t) - 1)
    nearest = np.where(np.abs(gt_t[left] - est_t) <= np.abs(gt_t[right] - est_t), left, right)
    keep = np.abs(gt_t[nearest] - est_t) <= max_dt
    return est_p[keep], gt_p[nearest[keep]]


def rigid_alignment(source: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Least-squares rotation and translation mapping source onto target.

    :return: (R, t) with target ~ source @ R.T + t.
    """
    source_mean = source.mean(axis=0)
    target_mean = target.mean(axis=0)
    covariance = (target - target_mean).T @ (source - source_mean)
    u, _, vt = np.linalg.svd(covariance)
    sign = np.sign(np.linalg.det(u @ vt)) or 1.0
    rotation = u @ np.diag([1.0, 1.0, sign]) @ vt
    return rotation, target_mean - rotation @ source_mean


def ate_rmse(
    est: Sequence,
    gt: Sequence,
    align: bool = True,
    max_dt: float = MAX_TIME_DIFFERENCE,
) -> float:
    """
    Root mean square translational error between two trajectories.

    :param est: estimated (t, Pose) or (t, xyz) pairs.
    :param gt: ground-truth pairs of the same form.
    :param align: rigidly align est onto gt first.
    :param max_dt: association window in seconds.
    :raise TimestampError: if fewer than two poses can be associated.
    """
    est_p, gt_p = associate(est, gt, max_dt)
    if len(est_p) < 2:
        raise TimestampError(
            "Only {n} poses could be associated within {dt} s; need 2.".format(
                n=len(est_p), dt=max_dt
            )
        )
    if align:
        rotation, translation = rigid_alignment(est_p, gt_p)
        est_p = est_p @ rotation.T + translation
    errors = est_p - gt_p
    return float(np.sqrt(np.mean(np.einsum("ij,ij->i", errors, errors))))


def relative_efficiency(t_ms: Sequence[float], utilization: Sequence[float]) -> float:
    """
    Mean of 1 / (t_i * u_i) over frames.

    :param t_ms: per-frame processing times in milliseconds.
    :param utilization: per-frame CPU utilization in (0, 1].
    :raise InputError: on empty or unequal inputs, or entries out of range.
    """
    t = np.asarray(t_ms, dtype=float).reshape(-1)
    u = np.asarray(utilization, dtype=float).reshape(-1)
    if len(t) == 0 or len(t) != len(u):
        raise InputError(
            "Need equally many times and utilizations, got {n} and {m}.".format(n=len(t), m=len(u))
        )
    if np.any(t <= 0) or np.any(u <= 0) or np.any(u > 1):
        raise InputError("Times must be positive and utilizations must lie in (0, 1].")
    return float(np.mean(1.0 / (t * u)))


@dataclass(frozen=True)
class Metrics:
    """Summary of a run."""

    frames: int
    ate_rmse: float
    elapsed_mean_ms: float
    elapsed_std_ms: float
    eta: float
    candidates_mean: float

    def report(self) -> str:
        return "\n".join(
            [
                "frames={}".format(self.frames),
                "ate_rmse={:.6f}".format(self.ate_rmse),
                "elapsed_mean_ms={:.3f}".format(self.elapsed_mean_ms),
                "elapsed_std_ms={:.3f}".format(self.elapsed_std_ms),
                "eta={:.6f}".format(self.eta),
                "candidates_mean={:.3f}".format(self.candidates_mean),
            ]
        )


def summarize(
    ate: float,
    elapsed_ms: Sequence[float] = (),
    utilization: Sequence[float] = (),
    candidates: Sequence[float] = (),
) -> Metrics:
    """
    Collect run statistics; eta is 0 when timings were not recorded.
    """
    elapsed = np.asarray(elapsed_ms, dtype=float)
    util = np.asarray(utilization, dtype=float)
    timed = len(elapsed) > 0 and len(util) == len(elapsed)
    timed = timed and bool(np.all(elapsed > 0) and np.all(util > 0))
    eta = 0.0
    if timed:
        eta = relative_efficiency(elapsed, util)
    elif len(elapsed):
        logger.info("Timings are zero or missing; eta not computed")
    return Metrics(
        frames=max(len(elapsed), len(candidates)),
        ate_rmse=float(ate),
        elapsed_mean_ms=float(elapsed.mean()) if len(elapsed) else 0.0,
        elapsed_std_ms=float(elapsed.std()) if len(elapsed) else 0.0,
        eta=eta,
        candidates_mean=float(np.mean(candidates)) if len(candidates) else 0.0,
    )

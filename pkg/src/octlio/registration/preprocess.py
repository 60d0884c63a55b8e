"""
Scan preprocessing: motion compensation, range cropping and downsampling.
"""

from collections.abc import Sequence

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from ..errors import ArgumentError, TimestampError
from ..geom import Pose, Scan

# Slack on timestamp coverage checks, in seconds.
TIME_SLACK = 1e-9


def _track_arrays(imu_track: Sequence[tuple[float, Pose]]):
    times = np.array([t for t, _ in imu_track], dtype=float)
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise TimestampError("Pose track timestamps must be strictly increasing.")
    rotations = Rotation.concatenate([pose.rot for _, pose in imu_track])
    translations = np.array([pose.trans for _, pose in imu_track], dtype=float)
    return times, rotations, translations


def interpolate_track(
    imu_track: Sequence[tuple[float, Pose]], times: np.ndarray
) -> tuple[Rotation, np.ndarray]:
    """
    Sample a pose track at the given times: geodesic interpolation of the
    rotation and linear interpolation of the translation between the
    bracketing samples.

    :raise TimestampError: if a time falls outside the track.
    """
    if not imu_track:
        raise TimestampError("Cannot interpolate an empty pose track.")
    track_times, rotations, translations = _track_arrays(imu_track)
    times = np.asarray(times, dtype=float).reshape(-1)
    if len(times) == 0:
        raise ArgumentError("Need at least one time to interpolate at.")
    if times.min() < track_times[0] - TIME_SLACK or times.max() > track_times[-1] + TIME_SLACK:
        raise TimestampError(
            "Times [{lo:.9f}, {hi:.9f}] are not covered by the pose track "
            "[{start:.9f}, {end:.9f}].".format(
                lo=times.min(), hi=times.max(), start=track_times[0], end=track_times[-1]
            )
        )
    if len(track_times) == 1:
        return (
            Rotation.from_quat(np.repeat(rotations.as_quat(), len(times), axis=0)),
            np.repeat(translations, len(times), axis=0),
        )
    clipped = np.clip(times, track_times[0], track_times[-1])
    rot = Slerp(track_times, rotations)(clipped)
    trans = np.column_stack(
        [np.interp(clipped, track_times, translations[:, axis]) for axis in range(3)]
    )
    return rot, trans


def deskew_scan(
    scan: Scan,
    imu_track: Sequence[tuple[float, Pose]],
    extrinsic: Pose | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Map every point of a scan into the IMU frame at the scan end time.

    Each point is first moved into the IMU frame through the extrinsic, then
    carried by the relative motion between its own timestamp and the scan
    end, read off the propagated pose track.

    :param scan: the raw scan in the sensor frame.
    :param imu_track: world poses of the IMU, (t, pose), covering the scan.
    :param extrinsic: sensor-to-IMU transform; identity when omitted.
    :return: (N, 3) compensated points and their (N,) absolute timestamps.
    :raise TimestampError: if the track does not cover a point timestamp or
        the scan end.
    """
    extrinsic = extrinsic or Pose.identity()
    timestamps = scan.timestamps
    imu_points = extrinsic.transform_points(scan.points)
    if len(scan) == 0:
        return imu_points, timestamps

    rot_i, trans_i = interpolate_track(imu_track, timestamps)
    rot_k, trans_k = interpolate_track(imu_track, np.array([scan.t_end]))
    world = rot_i.apply(imu_points) + trans_i
    return rot_k[0].inv().apply(world - trans_k[0]), timestamps


def crop_range(scan: Scan, min_range: float, max_range: float) -> Scan:
    """Drop points whose range is outside [min_range, max_range]."""
    if not 0 <= min_range < max_range:
        raise ArgumentError("Need 0 <= min_range < max_range.")
    ranges = np.linalg.norm(scan.points, axis=1)
    mask = (ranges >= min_range) & (ranges <= max_range)
    return Scan(scan.t_end, scan.points[mask], scan.t_off[mask], scan.duration)


def center_downsample(points: np.ndarray, res: float) -> np.ndarray:
    """
    Keep one point per cell of edge res: the one closest to the cell
    center, the earliest on ties.

    Selection, not averaging: every output point is an input point.

    :param points: (N, 3) points.
    :param res: cell edge length.
    :return: selected points in the order their cells were first seen.
    """
    if res <= 0:
        raise ArgumentError("Downsampling resolution must be positive, got {}.".format(res))
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        return points.copy()
    cells = np.floor(points / res).astype(np.int64)
    centers = (cells + 0.5) * res
    offsets = points - centers
    dist = np.einsum("ij,ij->i", offsets, offsets)

    _, first, inverse = np.unique(cells, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.lexsort((np.arange(len(points)), dist, inverse))
    grouped = inverse[order]
    starts = np.ones(len(order), dtype=bool)
    starts[1:] = grouped[1:] != grouped[:-1]
    chosen = order[starts]
    return points[chosen[np.argsort(first, kind="stable")]]


def random_downsample(
    points: np.ndarray,
    rate: int,
    mode: str = "stride",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """
    Thin a point sequence by an integer rate.

    :param rate: keep one point in rate.
    :param mode: 'stride' keeps indices 0, rate, 2*rate, ...; 'uniform' keeps
        ceil(N / rate) indices drawn without replacement, in input order.
    :param rng: generator for the uniform mode.
    """
    if isinstance(rate, bool) or not isinstance(rate, (int, np.integer)) or rate < 1:
        raise ArgumentError("Downsampling rate must be a positive integer, got {!r}.".format(rate))
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    match mode:
        case "stride":
            return points[::rate]
        case "uniform":
            rng = rng if rng is not None else np.random.default_rng(0)
            count = -(-len(points) // rate)
            keep = np.sort(rng.choice(len(points), size=count, replace=False))
            return points[keep]
        case _:
            raise ArgumentError("Unknown downsampling mode '{}'.".format(mode))

"""
Dataset and result files.

A dataset directory holds:

    scans.csv         index,t_end,duration,file
    scans/NNNNNN.csv  x,y,z,t_off per point
    imu.csv           t,ax,ay,az,gx,gy,gz
    groundtruth.tum   true IMU poses at the scan end times

Real numbers are written with repr so they read back exactly.
"""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..geom import ImuSample, Pose, Scan
from ..pipeline import PHASES, FrameResult, read_trajectory, write_trajectory

logger = logging.getLogger(__name__)

SCAN_HEADER = ("x", "y", "z", "t_off")
IMU_HEADER = ("t", "ax", "ay", "az", "gx", "gy", "gz")
INDEX_HEADER = ("index", "t_end", "duration", "file")
METRICS_HEADER = ("frame", "t", "elapsed_ms", "n_points", "n_corr", "candidates", "iters")
TIMING_HEADER = ("frame", "elapsed_ms", "cpu_util") + tuple(
    "{}_ms".format(phase) for phase in PHASES
)


def _real(value) -> str:
    return repr(float(value) + 0.0)


def _read_rows(path: str | Path, header: Sequence[str]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            first = next(reader)
        except StopIteration as exc:
            raise InputError("{}: empty file, expected a header.".format(path)) from exc
        if tuple(name.strip() for name in first) != tuple(header):
            raise InputError(
                "{path}: header {found} does not match {expected}.".format(
                    path=path, found=",".join(first), expected=",".join(header)
                )
            )
        rows = []
        for number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(
                    "{path}:{line}: expected {n} fields, got {m}.".format(
                        path=path, line=number, n=len(header), m=len(row)
                    )
                )
            rows.append(row)
        return rows


def _floats(path, rows: list[list[str]]) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0))
    try:
        return np.array(rows, dtype=float).reshape(len(rows), -1)
    except ValueError as exc:
        raise InputError("{}: non-numeric field.".format(path)) from exc


def write_scan(scan: Scan, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SCAN_HEADER)
        for p, t_off in zip(scan.points, scan.t_off):
            writer.writerow([_real(p[0]), _real(p[1]), _real(p[2]), _real(t_off)])


def read_scan(path: str | Path, t_end: float, duration: float) -> Scan:
    values = _floats(path, _read_rows(path, SCAN_HEADER))
    if len(values) == 0:
        return Scan(t_end, np.zeros((0, 3)), np.zeros(0), duration)
    return Scan(t_end, values[:, :3], values[:, 3], duration)


def write_imu(samples: Iterable[ImuSample], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(IMU_HEADER)
        for sample in samples:
            writer.writerow(
                [_real(sample.t)]
                + [_real(value) for value in sample.acc]
                + [_real(value) for value in sample.gyr]
            )


def read_imu(path: str | Path) -> list[ImuSample]:
    values = _floats(path, _read_rows(path, IMU_HEADER))
    return [ImuSample(float(row[0]), row[1:4].copy(), row[4:7].copy()) for row in values]


def write_dataset(
    directory: str | Path,
    scans: Sequence[Scan],
    imu: Sequence[ImuSample],
    groundtruth: Sequence[tuple[float, Pose]],
) -> Path:
    """Write a complete dataset directory; returns its path."""
    directory = Path(directory)
    (directory / "scans").mkdir(parents=True, exist_ok=True)
    with open(directory / "scans.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(INDEX_HEADER)
        for index, scan in enumerate(scans):
            name = "scans/{:06d}.csv".format(index)
            write_scan(scan, directory / name)
            writer.writerow([index, _real(scan.t_end), _real(scan.duration), name])
    write_imu(imu, directory / "imu.csv")
    write_trajectory(groundtruth, directory / "groundtruth.tum")
    logger.info("Wrote %d scans and %d IMU samples to %s", len(scans), len(imu), directory)
    return directory


def read_dataset(directory: str | Path) -> tuple[list[Scan], list[ImuSample]]:
    """
    Load the scans and IMU readings of a dataset directory.

    :raise InputError: on missing or malformed files.
    """
    directory = Path(directory)
    scans = []
    for row in _read_rows(directory / "scans.csv", INDEX_HEADER):
        try:
            t_end, duration = float(row[1]), float(row[2])
        except ValueError as exc:
            raise InputError("scans.csv: non-numeric time in {}.".format(row)) from exc
        scans.append(read_scan(directory / row[3], t_end, duration))
    return scans, read_imu(directory / "imu.csv")


def read_groundtruth(directory: str | Path) -> list[tuple[float, Pose]]:
    return read_trajectory(Path(directory) / "groundtruth.tum")


def write_metrics(results: Iterable[FrameResult], path: str | Path) -> None:
    """One row per frame with the columns of METRICS_HEADER."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for result in results:
            writer.writerow(
                [
                    result.index,
                    "{:.9f}".format(result.t),
                    "{:.3f}".format(result.elapsed_ms),
                    result.n_points,
                    result.n_valid_corr,
                    result.knn_candidates_evaluated,
                    result.iterations_used,
                ]
            )


def write_timing(results: Iterable[FrameResult], path: str | Path) -> None:
    """Per-frame CPU utilization and phase timings."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TIMING_HEADER)
        for result in results:
            writer.writerow(
                [result.index, "{:.3f}".format(result.elapsed_ms), "{:.4f}".format(result.cpu_util)]
                + ["{:.3f}".format(result.phases.get(phase, 0.0)) for phase in PHASES]
            )


def read_metrics(path: str | Path) -> dict[str, np.ndarray]:
    """Columns of a metrics file by name."""
    values = _floats(path, _read_rows(path, METRICS_HEADER))
    return {name: values[:, i] if len(values) else np.zeros(0) for i, name in enumerate(METRICS_HEADER)}


def read_timing(path: str | Path) -> dict[str, np.ndarray]:
    values = _floats(path, _read_rows(path, TIMING_HEADER))
    return {name: values[:, i] if len(values) else np.zeros(0) for i, name in enumerate(TIMING_HEADER)}

"""
Trajectories in TUM format: one line 't tx ty tz qx qy qz qw' per pose.
"""

from collections.abc import Iterable
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import InputError
from ..geom import Pose


def _number(value: float) -> str:
    # Adding 0.0 turns a negative zero into zero.
    return "{:.9g}".format(float(value) + 0.0)


def format_pose(t: float, pose: Pose) -> str:
    """Render one TUM line; the quaternion is signed so that qw >= 0."""
    quat = pose.rot.as_quat()
    if quat[3] < 0:
        quat = -quat
    fields = ["{:.9f}".format(float(t) + 0.0)]
    fields.extend(_number(value) for value in pose.trans)
    fields.extend(_number(value) for value in quat)
    return " ".join(fields)


def write_trajectory(poses: Iterable, path: str | Path) -> int:
    """
    Write poses chronologically in TUM format.

    :param poses: (t, Pose) pairs or objects with t and pose attributes.
    :param path: destination file.
    :return: number of poses written.
    """
    lines = []
    for item in poses:
        t, pose = (item.t, item.pose) if hasattr(item, "pose") else item
        lines.append((float(t), format_pose(t, pose)))
    lines.sort(key=lambda line: line[0])
    with open(path, "w", encoding="utf-8") as handle:
        for _, line in lines:
            handle.write(line + "\n")
    return len(lines)


def read_trajectory(path: str | Path) -> list[tuple[float, Pose]]:
    """
    Parse a TUM file; blank lines and '#' comments are skipped.

    :raise InputError: on a line without eight numbers.
    """
    poses = []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            try:
                values = [float(part) for part in parts]
            except ValueError as exc:
                raise InputError(
                    "{path}:{line}: not a number in '{text}'.".format(
                        path=path, line=number, text=text
                    )
                ) from exc
            if len(values) != 8:
                raise InputError(
                    "{path}:{line}: expected 8 values, got {n}.".format(
                        path=path, line=number, n=len(values)
                    )
                )
            quat = np.array(values[4:])
            if np.linalg.norm(quat) < 1e-12:
                raise InputError("{path}:{line}: zero quaternion.".format(path=path, line=number))
            poses.append((values[0], Pose(Rotation.from_quat(quat), values[1:4])))
    return poses

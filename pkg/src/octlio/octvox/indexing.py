import math
from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError, InputError, KeyRangeError

DEFAULT_WORLD_BOUND = 2**31


class VoxelKey(NamedTuple):
    """Integer grid coordinates of a voxel."""

    kx: int
    ky: int
    kz: int


def subvoxel_bits(s: int) -> tuple[int, int, int]:
    """Return the per-axis bits (b_x, b_y, b_z) of a subvoxel index."""
    return s & 1, (s >> 1) & 1, (s >> 2) & 1


def subvoxel_index(
    p, r_s: float, bound: int = DEFAULT_WORLD_BOUND
) -> tuple[VoxelKey, int]:
    """
    Quantize a world point to its voxel key and subvoxel index.

    k_sub = floor(p / r_s); the key is k_sub shifted right by one and the
    subvoxel index packs the low bits as b_x | b_y << 1 | b_z << 2. Python
    integers shift and mask with floor semantics, so negative coordinates
    land in the correct cell.

    :param p: a finite world point.
    :param r_s: subvoxel edge length in meters.
    :param bound: absolute bound on key components.
    :return: (voxel key, subvoxel index in [0, 7]).
    :raise KeyRangeError: if a key component exceeds the bound.
    """
    if r_s <= 0:
        raise ArgumentError("Subvoxel size must be positive, got {}.".format(r_s))
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise InputError("Cannot index a non-finite point ({}, {}, {}).".format(x, y, z))
    sx = math.floor(x / r_s)
    sy = math.floor(y / r_s)
    sz = math.floor(z / r_s)
    key = VoxelKey(sx >> 1, sy >> 1, sz >> 1)
    if abs(key.kx) > bound or abs(key.ky) > bound or abs(key.kz) > bound:
        raise KeyRangeError(
            "Voxel key {key} exceeds the world bound {bound}.".format(key=key, bound=bound)
        )
    return key, (sx & 1) | ((sy & 1) << 1) | ((sz & 1) << 2)


def subvoxel_bounds(key: VoxelKey, s: int, r_s: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Return the lower and upper corners of the cube addressed by (key, s).
    """
    bits = subvoxel_bits(s)
    lower = np.array(
        [(2 * key[axis] + bits[axis]) * r_s for axis in range(3)], dtype=float
    )
    return lower, lower + r_s

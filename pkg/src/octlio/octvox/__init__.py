"""The OctVox map: hashed voxels of eight averaged subvoxel representatives."""

from .indexing import VoxelKey, subvoxel_bits, subvoxel_bounds, subvoxel_index
from .robin_hood import ProbeStats, RobinHoodTable, mix_key
from .voxel_map import (
    BatchStats,
    InsertOutcome,
    MapSnapshot,
    OctVoxel,
    OctVoxMap,
    SubVoxelRecord,
)

__all__ = [
    "BatchStats",
    "InsertOutcome",
    "MapSnapshot",
    "OctVoxMap",
    "OctVoxel",
    "ProbeStats",
    "RobinHoodTable",
    "SubVoxelRecord",
    "VoxelKey",
    "mix_key",
    "subvoxel_bits",
    "subvoxel_bounds",
    "subvoxel_index",
]

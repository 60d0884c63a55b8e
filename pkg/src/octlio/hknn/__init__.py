"""Exact K-nearest-neighbor search over an OctVox map."""

from .search import Neighbor, SearchStats, brute_force_knn, full_list_scan, knn_search
from .traversal import (
    Group,
    OffsetEntry,
    TraversalList,
    build_traversal_list,
    dump_traversal_list,
    entry_offset,
    materialize_octants,
    reflect_entry,
    squared_gap,
    subvoxel_distance,
    subvoxel_distance_by_enumeration,
)

__all__ = [
    "Group",
    "Neighbor",
    "OffsetEntry",
    "SearchStats",
    "TraversalList",
    "brute_force_knn",
    "build_traversal_list",
    "dump_traversal_list",
    "entry_offset",
    "full_list_scan",
    "knn_search",
    "materialize_octants",
    "reflect_entry",
    "squared_gap",
    "subvoxel_distance",
    "subvoxel_distance_by_enumeration",
]

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError
from ..octvox import MapSnapshot, OctVoxMap, VoxelKey, subvoxel_bits, subvoxel_index
from .traversal import TraversalList

# Slack on R <= r_max comparisons, in meters.
_RADIUS_SLACK = 1e-12


class Neighbor(NamedTuple):
    """A map representative returned by a search."""

    mu: np.ndarray
    dist: float
    key: VoxelKey
    s: int

    @property
    def origin(self) -> tuple[VoxelKey, int]:
        return self.key, self.s


@dataclass
class SearchStats:
    """Work counters accumulated over searches."""

    queries: int = 0
    candidates: int = 0
    groups_visited: int = 0
    lookups: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.queries += other.queries
        self.candidates += other.candidates
        self.groups_visited += other.groups_visited
        self.lookups += other.lookups

    @property
    def mean_candidates(self) -> float:
        return self.candidates / self.queries if self.queries else 0.0


def _check_arguments(k: int, radius: float) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise ArgumentError("K must be a positive integer, got {!r}.".format(k))
    if not radius > 0:
        raise ArgumentError("Radius must be positive, got {!r}.".format(radius))


def knn_search(
    voxel_map: OctVoxMap,
    traversal: TraversalList,
    p_world,
    k: int,
    radius: float,
    *,
    early_termination: bool = True,
    octant_lists: tuple[TraversalList, ...] | None = None,
    stats: SearchStats | None = None,
    touched: set | None = None,
) -> list[Neighbor]:
    """
    Exact K nearest representatives within a radius.

    Groups are visited in increasing lower-bound order, each entry reflected
    into the query's octant. After a group, the search stops if K results
    are held and the worst of them is strictly closer than the next group's
    bound. Candidates beyond the radius are skipped, so fewer than K
    neighbors may come back.

    :param voxel_map: the map to read; it is not modified.
    :param traversal: a list built for the map's subvoxel size.
    :param p_world: the query point.
    :param k: number of neighbors.
    :param radius: search radius, at most traversal.r_max.
    :param early_termination: False visits every group.
    :param octant_lists: the eight materialized lists, used instead of
        reflecting entries per query.
    :param stats: counters to accumulate into.
    :param touched: receives the keys of every voxel read.
    :return: neighbors ascending by (dist, key, s).
    :raise ArgumentError: on invalid K or radius, or mismatched subvoxel size.
    """
    _check_arguments(k, radius)
    if radius > traversal.r_max + _RADIUS_SLACK:
        raise ArgumentError(
            "Radius {} exceeds the traversal list's r_max {}.".format(radius, traversal.r_max)
        )
    r_s = voxel_map.subvoxel_size
    if not math.isclose(r_s, traversal.r_s, rel_tol=1e-12):
        raise ArgumentError(
            "Traversal list built for r_s={} but the map uses r_s={}.".format(
                traversal.r_s, r_s
            )
        )

    qx, qy, qz = float(p_world[0]), float(p_world[1]), float(p_world[2])
    (kx, ky, kz), s_p = subvoxel_index((qx, qy, qz), r_s, voxel_map.config.world_bound)
    if octant_lists is not None:
        groups = octant_lists[s_p].search_groups
        flip, sx, sy, sz = 0, 1, 1, 1
    else:
        groups = traversal.search_groups
        flip = s_p ^ traversal.octant
        bx, by, bz = subvoxel_bits(flip)
        sx, sy, sz = 1 - 2 * bx, 1 - 2 * by, 1 - 2 * bz

    # Max-heap on (dist, key, s) through negated tuples.
    heap: list[tuple] = []
    cache: dict[tuple[int, int, int], object] = {}
    candidates = 0
    visited = 0
    for index, group in enumerate(groups):
        visited += 1
        for (dx, dy, dz), s in group.entries:
            key = (kx + sx * dx, ky + sy * dy, kz + sz * dz)
            if key in cache:
                voxel = cache[key]
            else:
                voxel = cache[key] = voxel_map.voxel(key)
            if voxel is None:
                continue
            record = voxel.slots[s ^ flip]
            if record.n == 0:
                continue
            candidates += 1
            mx, my, mz = record.mu
            ex, ey, ez = mx - qx, my - qy, mz - qz
            dist = math.sqrt(ex * ex + ey * ey + ez * ez)
            if dist > radius:
                continue
            item = (-dist, -key[0], -key[1], -key[2], -(s ^ flip), record.mu)
            if len(heap) < k:
                heapq.heappush(heap, item)
            elif item[:5] > heap[0][:5]:
                heapq.heapreplace(heap, item)
        if (
            early_termination
            and len(heap) == k
            and index + 1 < len(groups)
            and -heap[0][0] < groups[index + 1].bound
        ):
            break

    if stats is not None:
        stats.queries += 1
        stats.candidates += candidates
        stats.groups_visited += visited
        stats.lookups += len(cache)
    if touched is not None:
        touched.update(VoxelKey(*key) for key, voxel in cache.items() if voxel is not None)

    ordered = sorted((-item[0], -item[1], -item[2], -item[3], -item[4], item[5]) for item in heap)
    return [
        Neighbor(np.array(mu), dist, VoxelKey(x, y, z), s) for dist, x, y, z, s, mu in ordered
    ]


def full_list_scan(
    voxel_map: OctVoxMap,
    traversal: TraversalList,
    p_world,
    k: int,
    radius: float,
    stats: SearchStats | None = None,
) -> list[Neighbor]:
    """The same search without early termination; the work baseline."""
    return knn_search(
        voxel_map, traversal, p_world, k, radius, early_termination=False, stats=stats
    )


def brute_force_knn(source: OctVoxMap | MapSnapshot, p_world, k: int, radius: float) -> list[Neighbor]:
    """
    Scan every occupied slot, keep those within the radius, order by
    (dist, key, s) and truncate to K.
    """
    _check_arguments(k, radius)
    snapshot = source.snapshot() if isinstance(source, OctVoxMap) else source
    if len(snapshot) == 0:
        return []
    qx, qy, qz = float(p_world[0]), float(p_world[1]), float(p_world[2])
    mu = snapshot.mu
    ex, ey, ez = mu[:, 0] - qx, mu[:, 1] - qy, mu[:, 2] - qz
    dist = np.sqrt(ex * ex + ey * ey + ez * ez)
    inside = np.flatnonzero(dist <= radius)
    keys = snapshot.keys[inside]
    order = np.lexsort(
        (snapshot.s[inside], keys[:, 2], keys[:, 1], keys[:, 0], dist[inside])
    )[:k]
    return [
        Neighbor(
            mu[inside[i]].copy(),
            float(dist[inside[i]]),
            VoxelKey(*(int(c) for c in keys[i])),
            int(snapshot.s[inside[i]]),
        )
        for i in order
    ]

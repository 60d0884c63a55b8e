import logging
from collections import OrderedDict
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..config.settings import MapConfig
from ..errors import ArgumentError
from .indexing import VoxelKey, subvoxel_index
from .robin_hood import RobinHoodTable

logger = logging.getLogger(__name__)

SLOTS_PER_VOXEL = 8


class InsertOutcome(Enum):
    """What an insertion did to its subvoxel slot."""

    INITIALIZED = auto()
    MERGED = auto()
    REJECTED_GATE = auto()
    REJECTED_SATURATED = auto()


@dataclass(slots=True)
class SubVoxelRecord:
    """
    A subvoxel representative and its insertion counter; n == 0 means unset.
    """

    mu: tuple[float, float, float] = (0.0, 0.0, 0.0)
    n: int = 0


def _empty_slots() -> list[SubVoxelRecord]:
    return [SubVoxelRecord() for _ in range(SLOTS_PER_VOXEL)]


@dataclass(slots=True)
class OctVoxel:
    """
    Eight subvoxel slots, always allocated, plus the last access stamp.
    """

    slots: list[SubVoxelRecord] = field(default_factory=_empty_slots)
    recency: int = 0

    @property
    def occupied(self) -> int:
        return sum(1 for record in self.slots if record.n > 0)


@dataclass
class BatchStats:
    """Per-outcome counts of a batch insertion."""

    initialized: int = 0
    merged: int = 0
    rejected_gate: int = 0
    rejected_saturated: int = 0
    evicted: int = 0

    def record(self, outcome: InsertOutcome) -> None:
        match outcome:
            case InsertOutcome.INITIALIZED:
                self.initialized += 1
            case InsertOutcome.MERGED:
                self.merged += 1
            case InsertOutcome.REJECTED_GATE:
                self.rejected_gate += 1
            case InsertOutcome.REJECTED_SATURATED:
                self.rejected_saturated += 1

    @property
    def total(self) -> int:
        return self.initialized + self.merged + self.rejected_gate + self.rejected_saturated


class MapSnapshot(NamedTuple):
    """
    Every occupied slot of a map, sorted by (key, s).

    :ivar keys: (M, 3) int64 voxel keys.
    :ivar s: (M,) subvoxel indices.
    :ivar mu: (M, 3) representatives.
    :ivar n: (M,) counters.
    """

    keys: np.ndarray
    s: np.ndarray
    mu: np.ndarray
    n: np.ndarray

    def __len__(self) -> int:
        return len(self.s)


class OctVoxMap:
    """
    A hashed voxel grid where each voxel holds eight incrementally averaged
    subvoxel representatives, bounded by a least-recently-used voxel budget.

    Access follows a two-phase contract. During a read phase any number of
    searches may read the map concurrently; they never stamp recency and
    instead collect touched keys in their own buffers. During the exclusive
    write phase a single caller inserts points, hands the collected keys to
    :meth:`flush_touches` and evicts down to capacity.
    """

    def __init__(self, config: MapConfig | None = None) -> None:
        self.config = config or MapConfig()
        self._table: RobinHoodTable[OctVoxel] = RobinHoodTable()
        # Voxel keys in ascending recency order.
        self._lru: OrderedDict[VoxelKey, None] = OrderedDict()
        self._clock = 0

    def __len__(self) -> int:
        return len(self._table)

    @property
    def count(self) -> int:
        """Number of live voxels."""
        return len(self._table)

    @property
    def subvoxel_size(self) -> float:
        return self.config.subvoxel_size

    @property
    def clock(self) -> int:
        return self._clock

    def voxel(self, key: VoxelKey) -> OctVoxel | None:
        """Return the voxel stored under key without touching its recency."""
        return self._table.get(key)

    def voxels(self) -> Iterator[tuple[VoxelKey, OctVoxel]]:
        return self._table.items()

    def _stamp(self, key: VoxelKey, voxel: OctVoxel) -> None:
        self._clock += 1
        voxel.recency = self._clock
        self._lru[key] = None
        self._lru.move_to_end(key)

    def _evict_oldest(self) -> VoxelKey:
        key, _ = self._lru.popitem(last=False)
        self._table.pop(key)
        return key

    def insert_point(self, p) -> InsertOutcome:
        """
        Insert one world point into its subvoxel slot.

        An empty slot takes the point as its representative. An occupied slot
        merges it by incremental mean when the point lies within tau_merge of
        the representative and the counter has not passed n_max; otherwise
        the point is discarded. The voxel is stamped as most recently used.

        :param p: a finite world point.
        :return: the outcome for the slot.
        :raise KeyRangeError: if the point lies outside the world bound.
        """
        config = self.config
        key, s = subvoxel_index(p, config.subvoxel_size, config.world_bound)
        voxel = self._table.get(key)
        if voxel is None:
            while len(self._table) >= config.capacity:
                evicted = self._evict_oldest()
                logger.debug("Evicted voxel %s to admit %s", evicted, key)
            voxel = OctVoxel()
            self._table.insert(key, voxel)
        self._stamp(key, voxel)

        record = voxel.slots[s]
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        if record.n == 0:
            record.mu = (x, y, z)
            record.n = 1
            return InsertOutcome.INITIALIZED

        mx, my, mz = record.mu
        dx, dy, dz = x - mx, y - my, z - mz
        if dx * dx + dy * dy + dz * dz > config.tau_merge * config.tau_merge:
            return InsertOutcome.REJECTED_GATE
        if record.n > config.n_max:
            return InsertOutcome.REJECTED_SATURATED
        scale = 1.0 / (record.n + 1)
        record.mu = (mx + dx * scale, my + dy * scale, mz + dz * scale)
        record.n += 1
        return InsertOutcome.MERGED

    def insert_scan(self, points: Iterable) -> BatchStats:
        """
        Insert world points in order; equivalent to repeated insert_point.

        :param points: an (N, 3) array or any iterable of 3-vectors.
        :return: counts per outcome.
        """
        stats = BatchStats()
        for p in points:
            stats.record(self.insert_point(p))
        return stats

    def get_representative(self, key: VoxelKey, s: int) -> tuple[np.ndarray, int] | None:
        """
        Read a slot; absent voxels and empty slots give None. Reads do not
        stamp recency.
        """
        if not 0 <= s < SLOTS_PER_VOXEL:
            raise ArgumentError("Subvoxel index must lie in [0, 7], got {}.".format(s))
        voxel = self._table.get(key)
        if voxel is None:
            return None
        record = voxel.slots[s]
        if record.n == 0:
            return None
        return np.array(record.mu), record.n

    def flush_touches(self, keys: Iterable[VoxelKey]) -> int:
        """
        Stamp voxels recorded by searches during the read phase.

        Keys are stamped in sorted order so the result does not depend on the
        order the buffers were filled in. Keys evicted meanwhile are ignored.

        :return: number of voxels stamped.
        """
        stamped = 0
        for key in sorted(set(keys)):
            voxel = self._table.get(key)
            if voxel is not None:
                self._stamp(key, voxel)
                stamped += 1
        return stamped

    def evict_to_capacity(self) -> int:
        """
        Remove least-recently-used voxels until count <= capacity.

        Stamps come from one monotone counter, so the recency order is total.

        :return: number of voxels evicted.
        """
        evicted = 0
        while len(self._table) > self.config.capacity:
            self._evict_oldest()
            evicted += 1
        if evicted:
            logger.debug("Evicted %d voxels, %d remain", evicted, len(self._table))
        return evicted

    def snapshot(self) -> MapSnapshot:
        """Collect every occupied slot into arrays sorted by (key, s)."""
        rows = [
            (key, s, record.mu, record.n)
            for key, voxel in self._table.items()
            for s, record in enumerate(voxel.slots)
            if record.n > 0
        ]
        rows.sort(key=lambda row: (row[0], row[1]))
        if not rows:
            return MapSnapshot(
                np.zeros((0, 3), dtype=np.int64),
                np.zeros(0, dtype=np.int64),
                np.zeros((0, 3)),
                np.zeros(0, dtype=np.int64),
            )
        return MapSnapshot(
            np.array([row[0] for row in rows], dtype=np.int64),
            np.array([row[1] for row in rows], dtype=np.int64),
            np.array([row[2] for row in rows], dtype=float),
            np.array([row[3] for row in rows], dtype=np.int64),
        )

    def export_snapshot(self, path: str | Path) -> int:
        """
        Write one line 'kx,ky,kz,s,mux,muy,muz,n' per occupied slot.

        :return: number of lines written.
        """
        snapshot = self.snapshot()
        with open(path, "w", encoding="utf-8") as handle:
            for key, s, mu, n in zip(snapshot.keys, snapshot.s, snapshot.mu, snapshot.n):
                handle.write(
                    "{},{},{},{},{!r},{!r},{!r},{}\n".format(
                        key[0], key[1], key[2], s, float(mu[0]), float(mu[1]), float(mu[2]), n
                    )
                )
        return len(snapshot)

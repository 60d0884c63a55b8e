"""
Distance-grouped traversal lists of subvoxel offsets.

A traversal list enumerates every subvoxel whose minimum distance to the
query's own subvoxel is at most r_max, expressed as (voxel offset, subvoxel
index) pairs relative to the query voxel, and buckets them by that distance.
Distances are kept as integer squared gaps so that grouping is exact.

The *core* groups cover the (2n+1)^3 subvoxel box around the query, with
n = max(1, floor(r_max / r_s)); the *fringe* groups hold the remaining
subvoxels within r_max that lie outside the box. Searches walk both, merged
by bound.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError
from ..octvox.indexing import subvoxel_bits

# Bucketing tolerance on distances, in meters.
BOUND_TOLERANCE = 1e-9


class OffsetEntry(NamedTuple):
    """A subvoxel addressed relative to the query voxel."""

    dk: tuple[int, int, int]
    s: int


class Group(NamedTuple):
    """
    Entries sharing one lower-bound distance.

    :ivar bound_sq: squared distance in units of r_s squared.
    :ivar bound: distance in meters, r_s * sqrt(bound_sq).
    :ivar entries: entries sorted by (dk, s).
    """

    bound_sq: int
    bound: float
    entries: tuple[OffsetEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)


def squared_gap(offset) -> int:
    """Sum over axes of max(|d| - 1, 0) squared, for a subvoxel grid offset."""
    total = 0
    for d in offset:
        gap = abs(d) - 1
        if gap > 0:
            total += gap * gap
    return total


def subvoxel_distance(offset, r_s: float) -> float:
    """
    Minimum Euclidean distance between two grid-aligned subvoxel cubes.

    :param offset: integer offset between the cubes in subvoxel units.
    :param r_s: subvoxel edge length.
    :return: r_s * sqrt(sum of squared per-axis gaps).
    """
    if r_s <= 0:
        raise ArgumentError("Subvoxel size must be positive, got {}.".format(r_s))
    return r_s * math.sqrt(squared_gap(offset))


def subvoxel_distance_by_enumeration(offset, r_s: float) -> float:
    """Minimum over all 8 x 8 vertex pairs of the two cubes."""
    corners = np.array(list(itertools.product((0, 1), repeat=3)), dtype=float) * r_s
    other = corners + np.asarray(offset, dtype=float) * r_s
    differences = corners[:, None, :] - other[None, :, :]
    return float(np.sqrt((differences**2).sum(axis=2)).min())


def entry_offset(entry: OffsetEntry, octant: int = 0) -> tuple[int, int, int]:
    """Offset in subvoxel units from the query subvoxel to the entry."""
    bits = subvoxel_bits(entry.s)
    query = subvoxel_bits(octant)
    return tuple(2 * entry.dk[a] + bits[a] - query[a] for a in range(3))


def _entry_at(offset, octant: int) -> OffsetEntry:
    """Inverse of entry_offset."""
    query = subvoxel_bits(octant)
    dk = []
    s = 0
    for axis in range(3):
        absolute = offset[axis] + query[axis]
        dk.append(absolute >> 1)
        s |= (absolute & 1) << axis
    return OffsetEntry(tuple(dk), s)


def reflect_entry(entry: OffsetEntry, s_j: int) -> OffsetEntry:
    """
    Mirror an entry into octant s_j.

    Every axis whose bit is set in s_j has its voxel offset negated; the
    subvoxel index is flipped with an xor.
    """
    if not 0 <= s_j <= 7:
        raise ArgumentError("Octant must lie in [0, 7], got {}.".format(s_j))
    bits = subvoxel_bits(s_j)
    dk = tuple(-d if bit else d for d, bit in zip(entry.dk, bits))
    return OffsetEntry(dk, entry.s ^ s_j)


def _bucket(entries: list[tuple[int, OffsetEntry]], r_s: float) -> tuple[Group, ...]:
    buckets: dict[int, list[OffsetEntry]] = {}
    for bound_sq, entry in entries:
        buckets.setdefault(bound_sq, []).append(entry)
    return tuple(
        Group(bound_sq, r_s * math.sqrt(bound_sq), tuple(sorted(buckets[bound_sq])))
        for bound_sq in sorted(buckets)
    )


@dataclass(frozen=True)
class TraversalList:
    """
    Immutable, shareable traversal list for one query octant.

    :ivar r_max: largest supported search radius.
    :ivar r_s: subvoxel edge length.
    :ivar octant: query subvoxel index the offsets are relative to.
    :ivar groups: core groups, strictly increasing bounds.
    :ivar fringe: groups outside the core box, strictly increasing bounds.
    """

    r_max: float
    r_s: float
    octant: int = 0
    groups: tuple[Group, ...] = field(default=())
    fringe: tuple[Group, ...] = field(default=())

    @property
    def half_width(self) -> int:
        return max(1, math.floor(self.r_max / self.r_s + BOUND_TOLERANCE))

    @property
    def entries(self) -> tuple[OffsetEntry, ...]:
        """Core entries, group by group."""
        return tuple(entry for group in self.groups for entry in group.entries)

    @property
    def size(self) -> int:
        """Number of entries in core and fringe together."""
        return sum(len(group) for group in self.groups + self.fringe)

    @property
    def bounds(self) -> tuple[float, ...]:
        return tuple(group.bound for group in self.groups)

    @cached_property
    def search_groups(self) -> tuple[Group, ...]:
        """Core and fringe groups merged by bound, in visiting order."""
        return _bucket(
            [
                (group.bound_sq, entry)
                for group in self.groups + self.fringe
                for entry in group.entries
            ],
            self.r_s,
        )

    def for_octant(self, s_j: int) -> "TraversalList":
        """Reflect every entry into the list for octant octant ^ s_j."""

        def reflect(groups: tuple[Group, ...]) -> tuple[Group, ...]:
            return tuple(
                Group(
                    group.bound_sq,
                    group.bound,
                    tuple(sorted(reflect_entry(entry, s_j) for entry in group.entries)),
                )
                for group in groups
            )

        return TraversalList(
            self.r_max,
            self.r_s,
            self.octant ^ s_j,
            reflect(self.groups),
            reflect(self.fringe),
        )


def build_traversal_list(r_max: float, r_s: float, octant: int = 0) -> TraversalList:
    """
    Enumerate all subvoxels within r_max of the query subvoxel.

    :param r_max: largest search radius the list must support.
    :param r_s: subvoxel edge length.
    :param octant: query subvoxel index; 0 gives the canonical list.
    :return: the grouped list.
    :raise ArgumentError: if r_max < 0, r_s <= 0 or the octant is invalid.
    """
    if r_max < 0:
        raise ArgumentError("r_max must be non-negative, got {}.".format(r_max))
    if r_s <= 0:
        raise ArgumentError("Subvoxel size must be positive, got {}.".format(r_s))
    if not 0 <= octant <= 7:
        raise ArgumentError("Octant must lie in [0, 7], got {}.".format(octant))

    half_width = max(1, math.floor(r_max / r_s + BOUND_TOLERANCE))
    # Per-axis gap can reach floor(r_max / r_s), so |d| up to that plus one.
    reach = math.floor(r_max / r_s + BOUND_TOLERANCE) + 1
    core: list[tuple[int, OffsetEntry]] = []
    fringe: list[tuple[int, OffsetEntry]] = []
    for offset in itertools.product(range(-reach, reach + 1), repeat=3):
        bound_sq = squared_gap(offset)
        if r_s * math.sqrt(bound_sq) > r_max + BOUND_TOLERANCE:
            continue
        entry = _entry_at(offset, octant)
        if max(abs(d) for d in offset) <= half_width:
            core.append((bound_sq, entry))
        else:
            fringe.append((bound_sq, entry))
    return TraversalList(r_max, r_s, octant, _bucket(core, r_s), _bucket(fringe, r_s))


def materialize_octants(canonical: TraversalList) -> tuple[TraversalList, ...]:
    """Precompute the reflected list for each of the eight query octants."""
    if canonical.octant != 0:
        raise ArgumentError("Octant lists are materialized from the canonical list.")
    return tuple(canonical.for_octant(s_j) for s_j in range(8))


def dump_traversal_list(traversal: TraversalList, path: str | Path | None = None) -> str:
    """
    Render 'group_index,bound_sq_int,dkx,dky,dkz,s' per entry, in search
    order.

    :param traversal: the list to dump.
    :param path: optional file to write the text to.
    :return: the text.
    """
    lines = [
        "{},{},{},{},{},{}".format(index, group.bound_sq, *entry.dk, entry.s)
        for index, group in enumerate(traversal.search_groups)
        for entry in group.entries
    ]
    text = "\n".join(lines) + ("\n" if lines else "")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text

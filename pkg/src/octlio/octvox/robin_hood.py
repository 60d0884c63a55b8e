"""
Open-addressed hash table with Robin Hood displacement.

Each occupied slot records its distance from its home bucket (DIB). An
insert walking past a slot whose DIB is smaller than its own takes the slot
and carries the evicted entry onward, which keeps probe lengths short and
even. Deletion shifts the following run back by one, so no tombstones exist.
"""

from collections.abc import Iterator
from typing import Any, Generic, NamedTuple, TypeVar

from ..errors import ArgumentError

_MASK64 = (1 << 64) - 1
_EMPTY = -1

V = TypeVar("V")


def mix_key(key: tuple[int, int, int]) -> int:
    """
    Mix three signed integers into a 64-bit hash.

    Large-prime multiply-and-xor followed by the splitmix64 finalizer.
    """
    h = ((key[0] * 73856093) ^ (key[1] * 19349663) ^ (key[2] * 83492791)) & _MASK64
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK64
    h ^= h >> 33
    return h


class ProbeStats(NamedTuple):
    """Displacement statistics over all occupied slots."""

    size: int
    capacity: int
    mean: float
    maximum: int
    above_four: int


class RobinHoodTable(Generic[V]):
    """
    A map from integer triples to values, stored in one power-of-two array.
    """

    def __init__(self, capacity: int = 64, max_load: float = 0.7) -> None:
        """
        :param capacity: initial slot count, rounded up to a power of two.
        :param max_load: load factor that triggers doubling.
        """
        if not 0 < max_load < 1:
            raise ArgumentError("max_load must lie in (0, 1), got {}.".format(max_load))
        self._max_load = max_load
        self._size = 0
        self._allocate(1 << max(3, (capacity - 1).bit_length()))

    def _allocate(self, capacity: int) -> None:
        self._capacity = capacity
        self._mask = capacity - 1
        self._keys: list[Any] = [None] * capacity
        self._values: list[Any] = [None] * capacity
        self._dib: list[int] = [_EMPTY] * capacity

    def __len__(self) -> int:
        return self._size

    def __contains__(self, key: tuple[int, int, int]) -> bool:
        return self._find(key) >= 0

    @property
    def capacity(self) -> int:
        return self._capacity

    def _find(self, key) -> int:
        index = mix_key(key) & self._mask
        dib = 0
        keys, dibs = self._keys, self._dib
        while True:
            slot_dib = dibs[index]
            if slot_dib < dib:
                # Empty slot, or a richer entry: the key would have taken it.
                return -1
            if keys[index] == key:
                return index
            index = (index + 1) & self._mask
            dib += 1

    def get(self, key, default: V | None = None) -> V | None:
        index = self._find(key)
        if index < 0:
            return default
        return self._values[index]

    def insert(self, key, value: V) -> None:
        """Insert a key or replace its value."""
        index = self._find(key)
        if index >= 0:
            self._values[index] = value
            return
        if self._size + 1 > self._max_load * self._capacity:
            self._grow()
        self._place(key, value)
        self._size += 1

    def _place(self, key, value) -> None:
        index = mix_key(key) & self._mask
        dib = 0
        while True:
            slot_dib = self._dib[index]
            if slot_dib == _EMPTY:
                self._keys[index] = key
                self._values[index] = value
                self._dib[index] = dib
                return
            if slot_dib < dib:
                key, self._keys[index] = self._keys[index], key
                value, self._values[index] = self._values[index], value
                dib, self._dib[index] = slot_dib, dib
            index = (index + 1) & self._mask
            dib += 1

    def pop(self, key, default: V | None = None) -> V | None:
        """Remove a key and return its value; backward-shift the run behind it."""
        index = self._find(key)
        if index < 0:
            return default
        value = self._values[index]
        following = (index + 1) & self._mask
        while self._dib[following] > 0:
            self._keys[index] = self._keys[following]
            self._values[index] = self._values[following]
            self._dib[index] = self._dib[following] - 1
            index = following
            following = (following + 1) & self._mask
        self._keys[index] = None
        self._values[index] = None
        self._dib[index] = _EMPTY
        self._size -= 1
        return value

    def _grow(self) -> None:
        entries = list(self.items())
        self._allocate(self._capacity * 2)
        for key, value in entries:
            self._place(key, value)

    def items(self) -> Iterator[tuple[Any, V]]:
        for key, value, dib in zip(self._keys, self._values, self._dib):
            if dib != _EMPTY:
                yield key, value

    def keys(self) -> Iterator[Any]:
        for key, _ in self.items():
            yield key

    def probe_stats(self) -> ProbeStats:
        """Return displacement statistics of the occupied slots."""
        occupied = [dib for dib in self._dib if dib != _EMPTY]
        if not occupied:
            return ProbeStats(0, self._capacity, 0.0, 0, 0)
        return ProbeStats(
            size=len(occupied),
            capacity=self._capacity,
            mean=sum(occupied) / len(occupied),
            maximum=max(occupied),
            above_four=sum(1 for dib in occupied if dib > 4),
        )

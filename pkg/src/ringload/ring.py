"""The cyclic order of hash points and expected-O(1) successor lookup.

Points compare by (position, kind, id): positions ascend clockwise, a ball
precedes a bin at the same position, and lower ids come first within a kind.
The successor structure is a bucket array over the position range: bucket i
holds the bins whose position falls in [i*r/t, (i+1)*r/t), kept sorted, with
t maintained within a constant factor of the bin count by doubling/halving.
Only bins are indexed; balls are tracked by the allocator's ball map.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from enum import IntEnum

from .errors import AlreadyPresentError, EmptySystemError, NotFoundError

# Internally every point is a plain (position, kind, id) tuple so ordering
# and bisection run on native tuple comparison.
Key = tuple[int, int, int]


class PointKind(IntEnum):
    BALL = 0
    BIN = 1


@dataclass(frozen=True, order=True)
class RingPoint:
    position: int
    kind: PointKind
    id: int

    def sort_key(self) -> Key:
        return (self.position, int(self.kind), self.id)


def ball_point(position: int, ball_id: int) -> RingPoint:
    return RingPoint(position, PointKind.BALL, ball_id)


def bin_point(position: int, bin_id: int) -> RingPoint:
    return RingPoint(position, PointKind.BIN, bin_id)


class SuccessorIndex:
    """Bucketed successor search over the active bin points."""

    __slots__ = ("_range", "_t", "_buckets", "_count")

    def __init__(self, range_bits: int, bucket_count: int = 1) -> None:
        if not 1 <= range_bits <= 63:
            raise ValueError(f"range_bits must be in [1, 63], got {range_bits}")
        if bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        self._range = 1 << range_bits
        self._t = bucket_count
        self._buckets: list[list[Key]] = [[] for _ in range(bucket_count)]
        self._count = 0

    @property
    def bin_count(self) -> int:
        return self._count

    @property
    def bucket_count(self) -> int:
        return self._t

    def points(self) -> list[RingPoint]:
        """All indexed bins in global ring order (for verification/tests)."""
        out = []
        for bucket in self._buckets:
            for pos, kind, bid in bucket:
                out.append(RingPoint(pos, PointKind(kind), bid))
        return out

    # -- updates ---------------------------------------------------------

    def insert_bin_point(self, point: RingPoint) -> None:
        if point.kind is not PointKind.BIN:
            raise ValueError("only bin points are indexed")
        if not 0 <= point.position < self._range:
            raise ValueError(f"position {point.position} outside range [0, {self._range})")
        key = point.sort_key()
        bucket = self._buckets[key[0] * self._t // self._range]
        idx = bisect_left(bucket, key)
        if idx < len(bucket) and bucket[idx] == key:
            raise AlreadyPresentError(f"bin point already indexed: {point}")
        bucket.insert(idx, key)
        self._count += 1
        if self._count > 2 * self._t:
            self._rebuild(self._t * 2)

    def remove_bin_point(self, point: RingPoint) -> None:
        key = point.sort_key()
        bucket = self._buckets[key[0] * self._t // self._range]
        idx = bisect_left(bucket, key)
        if idx >= len(bucket) or bucket[idx] != key:
            raise NotFoundError(f"bin point not indexed: {point}")
        del bucket[idx]
        self._count -= 1
        if self._count * 4 < self._t:
            self._rebuild(max(1, self._t // 2))

    def _rebuild(self, new_t: int) -> None:
        keys: list[Key] = []
        for bucket in self._buckets:
            keys.extend(bucket)
        self._t = new_t
        self._buckets = [[] for _ in range(new_t)]
        r = self._range
        for key in keys:
            insort(self._buckets[key[0] * new_t // r], key)

    # -- queries ---------------------------------------------------------

    def scan_key(self, key: Key, strict: bool = False) -> Key:
        """First indexed bin at-or-after `key` (strictly after when strict).

        Wraps around the cycle; raises EmptySystemError with no bins.
        """
        if self._count == 0:
            raise EmptySystemError("no active bins")
        t = self._t
        buckets = self._buckets
        b0 = key[0] * t // self._range
        bucket = buckets[b0]
        idx = bisect_right(bucket, key) if strict else bisect_left(bucket, key)
        if idx < len(bucket):
            return bucket[idx]
        b = b0
        for _ in range(t):
            b += 1
            if b == t:
                b = 0
            bucket = buckets[b]
            if bucket:
                return bucket[0]
        # Every other bucket was empty; wrap lands back in b0.
        return buckets[b0][0]

    def scan_key_cost(self, key: Key, strict: bool = False) -> tuple[Key, int]:
        """Like scan_key, also reporting how many buckets were examined."""
        if self._count == 0:
            raise EmptySystemError("no active bins")
        t = self._t
        buckets = self._buckets
        b0 = key[0] * t // self._range
        bucket = buckets[b0]
        idx = bisect_right(bucket, key) if strict else bisect_left(bucket, key)
        touched = 1
        if idx < len(bucket):
            return bucket[idx], touched
        b = b0
        for _ in range(t):
            b += 1
            if b == t:
                b = 0
            touched += 1
            bucket = buckets[b]
            if bucket:
                return bucket[0], touched
        return buckets[b0][0], touched

    def successor_bin(self, point: RingPoint) -> int:
        """Id of the first bin at-or-after `point` in cyclic tie-break order."""
        return self.scan_key(point.sort_key(), strict=False)[2]

    def next_bin_after_bin(self, point: RingPoint) -> int:
        """Id of the cyclic successor bin strictly after `point` (itself if alone)."""
        return self.scan_key(point.sort_key(), strict=True)[2]

"""Classic consistent hashing, no capacity constraint.

Every ball simply lands in the first bin at or after its point on the cycle.
Serves as the comparison baseline: with m = n its maximum load grows like
log n / log log n instead of staying near 1 + epsilon.
"""

from __future__ import annotations

from .errors import AlreadyPresentError, EmptySystemError, NotFoundError
from .hashing import HashKind, SplitMix64, new_family
from .ring import PointKind, RingPoint, SuccessorIndex


class PlainRing:
    def __init__(
        self,
        *,
        seed: int = 0,
        hash_kind: HashKind = HashKind.POLY5,
        range_bits: int = 32,
    ) -> None:
        sm = SplitMix64(seed)
        ball_seed = sm.next()
        bin_seed = sm.next()
        while bin_seed == ball_seed:
            bin_seed = sm.next()
        self.ball_family = new_family(hash_kind, ball_seed, range_bits)
        self.bin_family = new_family(hash_kind, bin_seed, range_bits)
        self.range_bits = range_bits
        self._index = SuccessorIndex(range_bits)
        self._loads: dict[int, int] = {}
        self._ball_bin: dict[int, int] = {}

    @property
    def ball_count(self) -> int:
        return len(self._ball_bin)

    @property
    def bin_count(self) -> int:
        return len(self._loads)

    def add_bin(self, bin_id: int) -> None:
        if bin_id in self._loads:
            raise AlreadyPresentError(f"bin {bin_id} already present")
        pos = self.bin_family.hash(bin_id)
        self._index.insert_bin_point(RingPoint(pos, PointKind.BIN, bin_id))
        self._loads[bin_id] = 0
        if self._ball_bin:
            # balls in the successor bin whose points now fall at or before
            # the new bin move over to it
            moved = [
                qid
                for qid, bid in self._ball_bin.items()
                if self._assign(qid) != bid
            ]
            for qid in moved:
                self._loads[self._ball_bin[qid]] -= 1
                nb = self._assign(qid)
                self._ball_bin[qid] = nb
                self._loads[nb] += 1

    def remove_bin(self, bin_id: int) -> None:
        if bin_id not in self._loads:
            raise NotFoundError(f"bin {bin_id} not present")
        orphans = [qid for qid, bid in self._ball_bin.items() if bid == bin_id]
        if orphans and len(self._loads) == 1:
            raise EmptySystemError("cannot remove the last bin while balls remain")
        pos = self.bin_family.hash(bin_id)
        self._index.remove_bin_point(RingPoint(pos, PointKind.BIN, bin_id))
        del self._loads[bin_id]
        for qid in orphans:
            nb = self._assign(qid)
            self._ball_bin[qid] = nb
            self._loads[nb] += 1

    def insert_ball(self, ball_id: int) -> int:
        if ball_id in self._ball_bin:
            raise AlreadyPresentError(f"ball {ball_id} already present")
        if not self._loads:
            raise EmptySystemError("cannot insert a ball with no bins")
        bid = self._assign(ball_id)
        self._ball_bin[ball_id] = bid
        self._loads[bid] += 1
        return bid

    def delete_ball(self, ball_id: int) -> None:
        bid = self._ball_bin.pop(ball_id, None)
        if bid is None:
            raise NotFoundError(f"ball {ball_id} not present")
        self._loads[bid] -= 1

    def _assign(self, ball_id: int) -> int:
        key = (self.ball_family.hash(ball_id), 0, ball_id)
        return self._index.scan_key(key, False)[2]

    def loads(self) -> dict[int, int]:
        return dict(self._loads)

    def placement(self) -> dict[int, int]:
        return dict(self._ball_bin)

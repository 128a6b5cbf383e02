"""Bounded-load allocation on the ring.

State model: every ball occupies one unit of capacity in its residence bin,
which is its hash bin or a bin reached from it by forwarding. The settled
invariant is that no ball passes a non-full bin: every bin strictly between
a ball's hash bin and its residence bin is at capacity. Capacities follow the
schedule: with c = 1 + epsilon, total capacity is ceil(c*m) split as evenly
as possible (lowest-id bins get the extra unit), except that capacities are
pinned at 1 while c*m < n.

Updates keep that invariant incrementally:

* ball insert  = unit capacity increases (hole-fill after each), place the
  ball in its hash bin, then forward from overfull bins until settled.
* ball delete  = remove the ball, cascade hole-filling backward, then unit
  capacity decreases (forwarding after each).
* bin add      = insert the point, pull every passing ball the new bin is
  entitled to via hole filling, then unit decreases on the old bins.
* bin remove   = unit increases on the remaining bins, drain the departing
  bin by forwarding, then unlink its point and rewire hash bins.

Per-bin forwarding counters and origin-grouped resident lists (the update
bookkeeping) are maintained exactly; `verify_settled` recounts them from
scratch on demand.
"""

from __future__ import annotations

import random
from bisect import bisect_left, insort
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    AlreadyPresentError,
    EmptySystemError,
    InfeasibleError,
    InvalidOperationError,
    NotFoundError,
)
from .hashing import MASK64, HashFamily, HashKind, SplitMix64, new_family
from .oracle import Snapshot
from .ring import Key, PointKind, RingPoint, SuccessorIndex

# Modulus for the ordering permutation pi(x) = (a*x + b) mod p. Any prime
# above the 64-bit id space works; 2^89 - 1 is Mersenne and comfortably big.
PERMUTATION_PRIME = (1 << 89) - 1


class ForwardPolicy(Enum):
    NEWEST_BALL = "newest"
    HIGHEST_PERMUTED_ID = "permuted"


@dataclass
class UpdateStats:
    """Per-operation movement accounting.

    balls_moved counts balls whose bin at the end of the operation differs
    from their bin at its start, excluding the inserted/deleted ball itself:
    a ball walked through several bins moved once, and a ball that returns
    to where it started did not move. forwardings counts the raw forward and
    hole-fill events, an upper bound on balls_moved. balls_transferred is
    the number of balls drained out of a departing bin during remove_bin.
    """

    balls_moved: int = 0
    forwardings: int = 0
    bins_visited: int = 0
    capacity_changes: int = 0
    max_run_observed: int = 0
    balls_transferred: int = 0


@dataclass(frozen=True)
class SearchResult:
    found: bool
    bin_id: int | None
    visited: int
    insertion_bin: int | None


@dataclass(frozen=True)
class CapacitySchedule:
    m: int
    n: int
    c: Fraction
    ordered_bins: tuple[int, ...]
    capacities: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.capacities)


@dataclass(frozen=True)
class VerifyReport:
    invariant1_ok: bool
    capacities_ok: bool
    schedule_ok: bool
    counters_ok: bool
    max_load_ok: bool

    @property
    def ok(self) -> bool:
        return (
            self.invariant1_ok
            and self.capacities_ok
            and self.schedule_ok
            and self.counters_ok
            and self.max_load_ok
        )


def _as_fraction(c) -> Fraction:
    # floats go through their decimal repr so 1.05 means exactly 21/20
    if isinstance(c, float):
        return Fraction(str(c))
    return Fraction(c)


def _profile(m: int, n: int, cnum: int, cden: int) -> tuple[int, int]:
    """Capacity profile (q, k): ranks < k get q+1, the rest get q.

    The c*m < n regime pins every capacity at 1, which is the (q=1, k=0)
    profile. Otherwise q = floor(cm/n) and k = ceil(cm) - n*q, making the
    total n*q + k = ceil(cm).
    """
    if cnum * m < cden * n:
        return 1, 0
    q = (cnum * m) // (cden * n)
    total = -((-cnum * m) // cden)
    return q, total - n * q


def _profile_total(n: int, qk: tuple[int, int]) -> int:
    return n * qk[0] + qk[1]


def compute_schedule(m: int, n: int, c, ordered_bins: Sequence[int]) -> CapacitySchedule:
    """Capacities for (m, n, c) over the given linear bin order."""
    if n == 0:
        raise EmptySystemError("schedule needs at least one bin")
    if m < 0:
        raise ValueError("m must be >= 0")
    frac = _as_fraction(c)
    if frac <= 1:
        raise ValueError(f"balancing parameter c must exceed 1, got {frac}")
    order = tuple(ordered_bins)
    if len(order) != n:
        raise ValueError("ordered_bins length must equal n")
    q, k = _profile(m, n, frac.numerator, frac.denominator)
    caps = tuple(q + 1 if rank < k else q for rank in range(n))
    return CapacitySchedule(m=m, n=n, c=frac, ordered_bins=order, capacities=caps)


class _Bin:
    __slots__ = ("id", "key", "capacity", "load", "forward_count", "groups")

    def __init__(self, bid: int, key: Key, capacity: int) -> None:
        self.id = bid
        self.key = key
        self.capacity = capacity
        self.load = 0
        self.forward_count = 0
        # origin bin id -> balls residing here that hashed to that origin
        self.groups: dict[int, list[_Ball]] = {}


class _Ball:
    __slots__ = ("id", "key", "pid", "arrival", "hash_bin", "residence_bin")

    def __init__(self, qid: int, key: Key, pid: int, hash_bin: int) -> None:
        self.id = qid
        self.key = key
        self.pid = pid
        self.arrival = 0
        self.hash_bin = hash_bin
        self.residence_bin = hash_bin


@dataclass(frozen=True)
class BinView:
    id: int
    position: int
    capacity: int
    load: int
    forward_count: int
    residents: dict[int, tuple[int, ...]]


@dataclass(frozen=True)
class BallView:
    id: int
    position: int
    hash_bin: int
    residence_bin: int


class Allocator:
    """A settled bounded-load system over dynamic balls and bins."""

    def __init__(
        self,
        c,
        *,
        seed: int = 0,
        policy: ForwardPolicy = ForwardPolicy.HIGHEST_PERMUTED_ID,
        hash_kind: HashKind = HashKind.POLY5,
        range_bits: int = 32,
    ) -> None:
        self.c = _as_fraction(c)
        if self.c <= 1:
            raise ValueError(f"balancing parameter c must exceed 1, got {self.c}")
        self._cnum = self.c.numerator
        self._cden = self.c.denominator
        self.policy = policy
        self.seed = seed
        self.hash_kind = hash_kind
        self.range_bits = range_bits
        sm = SplitMix64(seed)
        ball_seed = sm.next()
        bin_seed = sm.next()
        while bin_seed == ball_seed:  # independence requires distinct seeds
            bin_seed = sm.next()
        self.ball_family: HashFamily = new_family(hash_kind, ball_seed, range_bits)
        self.bin_family: HashFamily = new_family(hash_kind, bin_seed, range_bits)
        p = PERMUTATION_PRIME
        a = 1 + ((sm.next() << 64) | sm.next()) % (p - 1)
        b = ((sm.next() << 64) | sm.next()) % p
        self._perm = (a, b, p)
        self._index = SuccessorIndex(range_bits)
        self._balls: dict[int, _Ball] = {}
        self._bins: dict[int, _Bin] = {}
        self._sorted_ids: list[int] = []
        self._arrival = 0
        self._overfull: set[int] = set()
        self._move_log: dict[int, tuple[_Ball, int]] = {}

    # -- introspection ----------------------------------------------------

    @property
    def ball_count(self) -> int:
        return len(self._balls)

    @property
    def bin_count(self) -> int:
        return len(self._bins)

    @property
    def permutation(self) -> tuple[int, int, int]:
        return self._perm

    def ball_ids(self) -> list[int]:
        return list(self._balls)

    def bin_ids(self) -> list[int]:
        return list(self._sorted_ids)

    def loads(self) -> dict[int, int]:
        return {bid: b.load for bid, b in self._bins.items()}

    def placement(self) -> dict[int, int]:
        return {qid: q.residence_bin for qid, q in self._balls.items()}

    def capacity_of(self, bin_id: int) -> int:
        return self._bins[bin_id].capacity

    def load_of(self, bin_id: int) -> int:
        return self._bins[bin_id].load

    def forward_count_of(self, bin_id: int) -> int:
        return self._bins[bin_id].forward_count

    def bin_view(self, bin_id: int) -> BinView:
        b = self._bins[bin_id]
        return BinView(
            id=b.id,
            position=b.key[0],
            capacity=b.capacity,
            load=b.load,
            forward_count=b.forward_count,
            residents={o: tuple(q.id for q in members) for o, members in b.groups.items()},
        )

    def ball_view(self, ball_id: int) -> BallView:
        q = self._balls[ball_id]
        return BallView(
            id=q.id, position=q.key[0], hash_bin=q.hash_bin, residence_bin=q.residence_bin
        )

    def schedule(self) -> CapacitySchedule:
        return compute_schedule(self.ball_count, self.bin_count, self.c, self._sorted_ids)

    def snapshot(self) -> Snapshot:
        return Snapshot(
            balls={qid: q.key[0] for qid, q in self._balls.items()},
            bins={bid: (b.key[0], b.capacity) for bid, b in self._bins.items()},
            permutation=self._perm,
        )

    def max_load_limit(self) -> int:
        """ceil(c*m/n): the hard cap no settled load may exceed."""
        if not self._bins:
            return 0
        num = self._cnum * len(self._balls)
        den = self._cden * len(self._bins)
        return -((-num) // den)

    def clone(self, *, policy: ForwardPolicy | None = None) -> "Allocator":
        """Independent deep copy (hash families and permutation shared — immutable)."""
        twin = object.__new__(Allocator)
        twin.c = self.c
        twin._cnum = self._cnum
        twin._cden = self._cden
        twin.policy = policy if policy is not None else self.policy
        twin.seed = self.seed
        twin.hash_kind = self.hash_kind
        twin.range_bits = self.range_bits
        twin.ball_family = self.ball_family
        twin.bin_family = self.bin_family
        twin._perm = self._perm
        twin._index = SuccessorIndex(self.range_bits)
        twin._balls = {}
        for qid, q in self._balls.items():
            nq = _Ball(qid, q.key, q.pid, q.hash_bin)
            nq.arrival = q.arrival
            nq.residence_bin = q.residence_bin
            twin._balls[qid] = nq
        twin._bins = {}
        for bid, b in self._bins.items():
            nb = _Bin(bid, b.key, b.capacity)
            nb.load = b.load
            nb.forward_count = b.forward_count
            nb.groups = {
                o: [twin._balls[q.id] for q in members] for o, members in b.groups.items()
            }
            twin._bins[bid] = nb
            twin._index.insert_bin_point(RingPoint(b.key[0], PointKind.BIN, bid))
        twin._sorted_ids = list(self._sorted_ids)
        twin._arrival = self._arrival
        twin._overfull = set(self._overfull)
        twin._move_log = {}
        return twin

    # -- point / key helpers ----------------------------------------------

    def _pi(self, x: int) -> int:
        a, b, p = self._perm
        return (a * x + b) % p

    def ball_position(self, ball_id: int) -> int:
        return self.ball_family.hash(ball_id)

    def bin_position(self, bin_id: int) -> int:
        return self.bin_family.hash(bin_id)

    def _ball_key(self, ball_id: int) -> Key:
        return (self.ball_family.hash(ball_id), 0, ball_id)

    def _bin_key(self, bin_id: int) -> Key:
        return (self.bin_family.hash(bin_id), 1, bin_id)

    def _next_bin(self, key: Key) -> _Bin:
        return self._bins[self._index.scan_key(key, True)[2]]

    # -- load bookkeeping ---------------------------------------------------

    def _place(self, ball: _Ball, bin_: _Bin) -> None:
        grp = bin_.groups.get(ball.hash_bin)
        if grp is None:
            bin_.groups[ball.hash_bin] = [ball]
        else:
            grp.append(ball)
        bin_.load += 1
        if bin_.load > bin_.capacity:
            self._overfull.add(bin_.id)
        ball.residence_bin = bin_.id
        ball.arrival = self._arrival
        self._arrival += 1

    def _unplace(self, ball: _Ball, bin_: _Bin) -> None:
        grp = bin_.groups[ball.hash_bin]
        grp.remove(ball)
        if not grp:
            del bin_.groups[ball.hash_bin]
        bin_.load -= 1
        if bin_.load <= bin_.capacity:
            self._overfull.discard(bin_.id)

    def _set_capacity(self, bin_: _Bin, cap: int) -> None:
        bin_.capacity = cap
        if bin_.load > cap:
            self._overfull.add(bin_.id)
        else:
            self._overfull.discard(bin_.id)

    # -- schedule deltas ----------------------------------------------------

    def _delta_ball_op(self, m_new: int) -> tuple[list[tuple[int, int]], tuple[int, int]]:
        """Per-bin capacity deltas when the ball count becomes m_new."""
        n = len(self._sorted_ids)
        q0, k0 = _profile(len(self._balls), n, self._cnum, self._cden)
        q1, k1 = _profile(m_new, n, self._cnum, self._cden)
        out: list[tuple[int, int]] = []
        if (q0, k0) == (q1, k1):
            return out, (q1, k1)
        ids = self._sorted_ids
        cuts = sorted({0, k0, k1, n})
        for lo, hi in zip(cuts, cuts[1:]):
            if lo >= n:
                break
            d = (q1 + (lo < k1)) - (q0 + (lo < k0))
            if d:
                out.extend((ids[i], d) for i in range(lo, hi))
        assert sum(d for _b, d in out) == _profile_total(n, (q1, k1)) - _profile_total(
            n, (q0, k0)
        ), "schedule delta does not reconcile with totals"
        return out, (q1, k1)

    def _delta_add_bin(self, bin_id: int) -> tuple[list[tuple[int, int]], int]:
        """Deltas for the existing bins plus the newcomer's own capacity."""
        ids = self._sorted_ids
        n0 = len(ids)
        n1 = n0 + 1
        m = len(self._balls)
        rho = bisect_left(ids, bin_id)
        q0, k0 = _profile(m, n0, self._cnum, self._cden) if n0 else (0, 0)
        q1, k1 = _profile(m, n1, self._cnum, self._cden)
        newcomer = q1 + (rho < k1)
        out: list[tuple[int, int]] = []
        if n0:
            cuts = sorted({0, n0, rho, *(x for x in (k0, k1, k1 - 1) if 0 <= x <= n0)})
            for lo, hi in zip(cuts, cuts[1:]):
                if lo >= n0:
                    break
                new_rank = lo + (1 if lo >= rho else 0)
                d = (q1 + (new_rank < k1)) - (q0 + (lo < k0))
                if d:
                    out.extend((ids[i], d) for i in range(lo, hi))
            assert (
                sum(d for _b, d in out)
                == _profile_total(n1, (q1, k1)) - newcomer - _profile_total(n0, (q0, k0))
            ), "schedule delta does not reconcile with totals"
        return out, newcomer

    def _delta_remove_bin(self, bin_id: int) -> list[tuple[int, int]]:
        """Deltas for the bins that remain after bin_id departs."""
        ids = self._sorted_ids
        n0 = len(ids)
        n1 = n0 - 1
        m = len(self._balls)
        rho = bisect_left(ids, bin_id)
        q0, k0 = _profile(m, n0, self._cnum, self._cden)
        out: list[tuple[int, int]] = []
        if n1 == 0:
            return out
        q1, k1 = _profile(m, n1, self._cnum, self._cden)
        cuts = sorted({0, n0, rho, rho + 1, *(x for x in (k0, k1, k1 + 1) if 0 <= x <= n0)})
        for lo, hi in zip(cuts, cuts[1:]):
            if lo >= n0:
                break
            if lo == rho:
                continue  # the departing bin itself
            new_rank = lo - (1 if lo > rho else 0)
            d = (q1 + (new_rank < k1)) - (q0 + (lo < k0))
            if d:
                out.extend((ids[i], d) for i in range(lo, hi))
        departing_cap = q0 + (rho < k0)
        assert (
            sum(d for _b, d in out)
            == _profile_total(n1, (q1, k1)) - (_profile_total(n0, (q0, k0)) - departing_cap)
        ), "schedule delta does not reconcile with totals"
        return out

    def _apply_capacity_deltas(
        self, deltas: list[tuple[int, int]], stats: UpdateStats
    ) -> None:
        """Unit-at-a-time capacity changes in ascending bin id, settling after each."""
        for bid, d in deltas:
            bin_ = self._bins[bid]
            if d > 0:
                for _ in range(d):
                    self._set_capacity(bin_, bin_.capacity + 1)
                    stats.capacity_changes += 1
                    if bin_.forward_count > 0:
                        self._fill_cascade(bin_, stats)
            else:
                for _ in range(-d):
                    self._set_capacity(bin_, bin_.capacity - 1)
                    stats.capacity_changes += 1
                    if bin_.load > bin_.capacity:
                        self._settle_forward(bin_, stats)

    # -- settlement ---------------------------------------------------------

    def _pick_forward(self, bin_: _Bin) -> _Ball:
        """The resident to forward from an overfull bin, per policy."""
        best: _Ball | None = None
        if self.policy is ForwardPolicy.HIGHEST_PERMUTED_ID:
            for members in bin_.groups.values():
                for q in members:
                    if best is None or q.pid > best.pid:
                        best = q
        else:
            for members in bin_.groups.values():
                for q in members:
                    if best is None or q.arrival > best.arrival:
                        best = q
        assert best is not None, "forwarding from an empty bin"
        return best

    def _log_move(self, ball: _Ball) -> None:
        # remember where the ball sat when the current operation first moved it
        if ball.id not in self._move_log:
            self._move_log[ball.id] = (ball, ball.residence_bin)

    def _net_moves(self, exclude: int | None = None) -> int:
        """Balls whose bin changed over the operation, minus the subject."""
        count = 0
        for bid, (ball, start) in self._move_log.items():
            if bid != exclude and ball.residence_bin != start:
                count += 1
        return count

    def _settle_forward(
        self, bin_: _Bin, stats: UpdateStats, *, transfer_from: int | None = None
    ) -> None:
        """Forward per policy until no bin on the chain is overfull."""
        run = 0
        while bin_.load > bin_.capacity:
            nxt = self._next_bin(bin_.key)
            if nxt is bin_:
                raise AssertionError("single overfull bin cannot settle")
            run += 1  # one more bin on the overflow chain
            while bin_.load > bin_.capacity:
                ball = self._pick_forward(bin_)
                self._log_move(ball)
                self._unplace(ball, bin_)
                bin_.forward_count += 1
                self._place(ball, nxt)
                stats.forwardings += 1
                stats.bins_visited += 1
                if transfer_from is not None and bin_.id == transfer_from:
                    stats.balls_transferred += 1
            bin_ = nxt
        if run > stats.max_run_observed:
            stats.max_run_observed = run

    def _pick_fill(self, donor: _Bin, hole_key: Key) -> _Ball | None:
        """The ball to pull back from donor into the hole, or None.

        A resident qualifies when its origin bin lies at-or-before the hole
        in the cyclic frame cut just after the donor (i.e. the ball passes
        the hole's bin on its way to the donor).
        """
        akey = donor.key
        hrel = (hole_key <= akey, hole_key)
        bins = self._bins
        if self.policy is ForwardPolicy.HIGHEST_PERMUTED_ID:
            best: _Ball | None = None
            for oid, members in donor.groups.items():
                okey = bins[oid].key
                if (okey <= akey, okey) <= hrel:
                    for q in members:
                        if best is None or q.pid < best.pid:
                            best = q
            return best
        first_origin = None
        chosen: _Ball | None = None
        for oid, members in donor.groups.items():
            okey = bins[oid].key
            orel = (okey <= akey, okey)
            if orel <= hrel and (first_origin is None or orel < first_origin):
                first_origin = orel
                chosen = members[0]
        return chosen

    def _fill_cascade(self, bin_: _Bin, stats: UpdateStats) -> None:
        """Fill holes in bin_ from passing balls, cascading the hole forward."""
        scan = self._index.scan_key
        bins = self._bins
        while bin_.load < bin_.capacity and bin_.forward_count > 0:
            hole = bin_
            while hole.forward_count > 0:
                # scan forward for the first bin carrying a passing ball
                path = [hole]
                donor = hole
                ball: _Ball | None = None
                while True:
                    donor = bins[scan(donor.key, True)[2]]
                    stats.bins_visited += 1
                    if donor is hole:
                        raise AssertionError("hole-fill scan wrapped the ring")
                    ball = self._pick_fill(donor, hole.key)
                    if ball is not None:
                        break
                    path.append(donor)
                self._log_move(ball)
                self._unplace(ball, donor)
                self._place(ball, hole)
                for b in path:
                    b.forward_count -= 1
                stats.forwardings += 1
                if len(path) > stats.max_run_observed:
                    stats.max_run_observed = len(path)
                hole = donor

    # -- operations -----------------------------------------------------------

    def insert_ball(self, ball_id: int) -> UpdateStats:
        if not 0 <= ball_id <= MASK64:
            raise ValueError("ball id must be a 64-bit value")
        if ball_id in self._balls:
            raise AlreadyPresentError(f"ball {ball_id} already present")
        if not self._bins:
            raise EmptySystemError("cannot insert a ball with no bins")
        stats = UpdateStats()
        self._move_log = {}
        deltas, _qk = self._delta_ball_op(len(self._balls) + 1)
        self._apply_capacity_deltas(deltas, stats)
        key = self._ball_key(ball_id)
        hb = self._bins[self._index.scan_key(key, False)[2]]
        stats.bins_visited += 1
        ball = _Ball(ball_id, key, self._pi(ball_id), hb.id)
        self._balls[ball_id] = ball
        self._place(ball, hb)
        if hb.load > hb.capacity:
            self._settle_forward(hb, stats)
        assert not self._overfull, "overfull bins survived insert_ball"
        stats.balls_moved = self._net_moves(exclude=ball_id)
        return stats

    def delete_ball(self, ball_id: int) -> UpdateStats:
        ball = self._balls.get(ball_id)
        if ball is None:
            raise NotFoundError(f"ball {ball_id} not present")
        stats = UpdateStats()
        self._move_log = {}
        deltas, _qk = self._delta_ball_op(len(self._balls) - 1)
        res = self._bins[ball.residence_bin]
        if ball.hash_bin != res.id:
            # every bin on the span loses one passing ball
            b = self._bins[ball.hash_bin]
            while b is not res:
                b.forward_count -= 1
                stats.bins_visited += 1
                b = self._next_bin(b.key)
        self._unplace(ball, res)
        del self._balls[ball_id]
        self._fill_cascade(res, stats)
        self._apply_capacity_deltas(deltas, stats)
        assert not self._overfull, "overfull bins survived delete_ball"
        stats.balls_moved = self._net_moves(exclude=ball_id)
        return stats

    def add_bin(self, bin_id: int) -> UpdateStats:
        if not 0 <= bin_id <= MASK64:
            raise ValueError("bin id must be a 64-bit value")
        if bin_id in self._bins:
            raise AlreadyPresentError(f"bin {bin_id} already present")
        if len(self._bins) + 1 > (1 << self.range_bits):
            raise InvalidOperationError("ring range smaller than bin count")
        stats = UpdateStats()
        self._move_log = {}
        deltas, newcomer_cap = self._delta_add_bin(bin_id)
        key = self._bin_key(bin_id)
        nb = _Bin(bin_id, key, newcomer_cap)
        self._bins[bin_id] = nb
        self._index.insert_bin_point(RingPoint(key[0], PointKind.BIN, bin_id))
        insort(self._sorted_ids, bin_id)
        if self._balls:
            self._absorb_redirected(nb, stats)
            self._fill_cascade(nb, stats)
        self._apply_capacity_deltas(deltas, stats)
        assert not self._overfull, "overfull bins survived add_bin"
        stats.balls_moved = self._net_moves()
        return stats

    def _absorb_redirected(self, nb: _Bin, stats: UpdateStats) -> None:
        """Rewire hash bins split off by the new point and set its counter.

        Balls that hashed to nb's successor but whose points now fall at or
        before nb become nb's own; additionally every ball residing in the
        full run after the successor whose origin lies at-or-before nb now
        passes nb, so nb's forward count picks them up.
        """
        succ = self._next_bin(nb.key)
        if succ is nb:
            return
        akey = succ.key
        nkey = nb.key
        nrel = (nkey <= akey, nkey)
        bins = self._bins
        passing = 0
        z = succ
        while True:
            grp = z.groups.get(succ.id)
            if grp:
                redirected = [q for q in grp if ((q.key <= akey, q.key) <= nrel)]
                if redirected:
                    if len(redirected) == len(grp):
                        del z.groups[succ.id]
                    else:
                        for q in redirected:
                            grp.remove(q)
                    tgt = z.groups.get(nb.id)
                    if tgt is None:
                        z.groups[nb.id] = list(redirected)
                    else:
                        tgt.extend(redirected)
                    for q in redirected:
                        q.hash_bin = nb.id
                    if z is not nb:
                        passing += len(redirected)
            zkey = z.key
            for oid, members in z.groups.items():
                if oid == nb.id or oid == succ.id:
                    continue
                okey = bins[oid].key
                if (okey <= zkey, okey) <= (nkey <= zkey, nkey):
                    passing += len(members)
            if z.load < z.capacity:
                break
            z = self._next_bin(z.key)
            stats.bins_visited += 1
            if z is succ:
                raise AssertionError("redirected-ball walk wrapped the ring")
        nb.forward_count += passing

    def remove_bin(self, bin_id: int) -> UpdateStats:
        bin_ = self._bins.get(bin_id)
        if bin_ is None:
            raise NotFoundError(f"bin {bin_id} not present")
        if len(self._bins) == 1 and self._balls:
            raise InvalidOperationError("cannot remove the last bin while balls remain")
        stats = UpdateStats()
        self._move_log = {}
        deltas = self._delta_remove_bin(bin_id)
        self._apply_capacity_deltas(deltas, stats)
        self._set_capacity(bin_, 0)
        if bin_.load > 0:
            self._settle_forward(bin_, stats, transfer_from=bin_id)
        assert bin_.load == 0 and not bin_.groups, "departing bin failed to drain"
        succ: _Bin | None = None
        if len(self._bins) > 1:
            succ = self._next_bin(bin_.key)
        self._index.remove_bin_point(RingPoint(bin_.key[0], PointKind.BIN, bin_id))
        idx = bisect_left(self._sorted_ids, bin_id)
        del self._sorted_ids[idx]
        del self._bins[bin_id]
        if self._balls and succ is not None:
            self._rewire_after_removal(bin_id, succ, stats)
        assert not self._overfull, "overfull bins survived remove_bin"
        stats.balls_moved = self._net_moves()
        return stats

    def _rewire_after_removal(self, removed_id: int, succ: _Bin, stats: UpdateStats) -> None:
        """Hash bins pointing at the removed bin collapse onto its successor."""
        z = succ
        while True:
            grp = z.groups.pop(removed_id, None)
            if grp:
                for q in grp:
                    q.hash_bin = succ.id
                tgt = z.groups.get(succ.id)
                if tgt is None:
                    z.groups[succ.id] = grp
                else:
                    tgt.extend(grp)
            if z.load < z.capacity:
                break
            z = self._next_bin(z.key)
            stats.bins_visited += 1
            if z is succ:
                break  # every bin full run wrapped; nothing further to collect

    def search(self, ball_id: int) -> SearchResult:
        """Scan from the ball's hash bin; stop at the ball or the first non-full bin."""
        if not self._bins:
            raise EmptySystemError("cannot search with no bins")
        key = self._ball_key(ball_id)
        b = self._bins[self._index.scan_key(key, False)[2]]
        visited = 1
        while True:
            for members in b.groups.values():
                for q in members:
                    if q.id == ball_id:
                        return SearchResult(True, b.id, visited, None)
            if b.load < b.capacity:
                return SearchResult(False, None, visited, b.id)
            b = self._next_bin(b.key)
            visited += 1
            if visited > len(self._bins):
                raise AssertionError("search wrapped a settled ring")

    def verify_settled(self, *, recount: bool = True) -> VerifyReport:
        """Check the settled-state contract from scratch.

        With recount=False the per-ball walk (invariant and counter recount)
        is skipped; schedule, capacity and hard-cap checks still run.
        """
        bins = self._bins
        balls = self._balls
        n = len(bins)
        m = len(balls)
        schedule_ok = True
        if n:
            q, k = _profile(m, n, self._cnum, self._cden)
            for rank, bid in enumerate(self._sorted_ids):
                if bins[bid].capacity != (q + 1 if rank < k else q):
                    schedule_ok = False
                    break
        capacities_ok = not self._overfull
        for b in bins.values():
            grouped = sum(len(g) for g in b.groups.values())
            if b.load != grouped or b.load > b.capacity or b.forward_count < 0:
                capacities_ok = False
                break
        max_load_ok = True
        if n:
            limit = self.max_load_limit()
            max_load_ok = all(b.load <= limit for b in bins.values())
        invariant1_ok = True
        counters_ok = True
        if recount and n:
            fc = dict.fromkeys(bins, 0)
            for ball in balls.values():
                if self._index.scan_key(ball.key, False)[2] != ball.hash_bin:
                    counters_ok = False  # stale origin
                res = bins.get(ball.residence_bin)
                if res is None or ball not in res.groups.get(ball.hash_bin, ()):
                    counters_ok = False
                    continue
                b = bins[ball.hash_bin]
                steps = 0
                while b.id != ball.residence_bin:
                    if b.load < b.capacity:
                        invariant1_ok = False
                    fc[b.id] += 1
                    b = self._next_bin(b.key)
                    steps += 1
                    if steps > n:
                        invariant1_ok = False
                        break
            if any(fc[bid] != bins[bid].forward_count for bid in bins):
                counters_ok = False
        return VerifyReport(
            invariant1_ok=invariant1_ok,
            capacities_ok=capacities_ok,
            schedule_ok=schedule_ok,
            counters_ok=counters_ok,
            max_load_ok=max_load_ok,
        )

    # -- bulk construction ----------------------------------------------------

    def bulk_build(self, ball_ids: Iterable[int]) -> None:
        """Construct the settled state for a batch of balls in one pass.

        Under HighestPermutedId the settled state is history independent, so
        it can be rebuilt directly by simple insertions in ascending permuted
        order under the final capacities. NewestBall states depend on the
        insertion history, so that policy falls back to inserting each ball
        in the given order. Requires a ball-free system either way.
        """
        if self._balls:
            raise InvalidOperationError("bulk_build requires a ball-free system")
        ids = list(ball_ids)
        if not ids:
            return
        if not self._bins:
            raise EmptySystemError("cannot build with no bins")
        if len(set(ids)) != len(ids):
            raise AlreadyPresentError("duplicate ball ids in bulk build")
        if self.policy is not ForwardPolicy.HIGHEST_PERMUTED_ID:
            for qid in ids:
                self.insert_ball(qid)
            return
        n = len(self._bins)
        m = len(ids)
        q, k = _profile(m, n, self._cnum, self._cden)
        for rank, bid in enumerate(self._sorted_ids):
            self._bins[bid].capacity = q + 1 if rank < k else q
        if _profile_total(n, (q, k)) < m:
            raise InfeasibleError("schedule total below ball count")

        a, b, p = self._perm
        order = sorted(ids, key=lambda x: (a * x + b) % p)

        ring = sorted(b.key for b in self._bins.values())
        caps = [self._bins[key[2]].capacity for key in ring]
        loads = [0] * n
        fc_diff = [0] * (n + 1)
        placements: list[tuple[int, int, int]] = []  # (ball id, origin idx, residence idx)
        for qid in order:
            if not 0 <= qid <= MASK64:
                raise ValueError("ball id must be a 64-bit value")
            key = (self.ball_family.hash(qid), 0, qid)
            i0 = bisect_left(ring, key)
            if i0 == n:
                i0 = 0
            i = i0
            while loads[i] == caps[i]:
                i += 1
                if i == n:
                    i = 0
            loads[i] += 1
            placements.append((qid, i0, i))
            if i != i0:  # span [i0, i) gains one passing ball
                if i0 < i:
                    fc_diff[i0] += 1
                    fc_diff[i] -= 1
                else:
                    fc_diff[i0] += 1
                    fc_diff[n] -= 1
                    fc_diff[0] += 1
                    fc_diff[i] -= 1

        acc = 0
        for i, key in enumerate(ring):
            acc += fc_diff[i]
            bin_ = self._bins[key[2]]
            bin_.load = loads[i]
            bin_.forward_count = acc
        for qid, i0, i in placements:
            origin = ring[i0][2]
            res_bin = self._bins[ring[i][2]]
            ball = _Ball(qid, (self.ball_family.hash(qid), 0, qid), self._pi(qid), origin)
            ball.residence_bin = res_bin.id
            ball.arrival = self._arrival
            self._arrival += 1
            grp = res_bin.groups.get(origin)
            if grp is None:
                res_bin.groups[origin] = [ball]
            else:
                grp.append(ball)
            self._balls[qid] = ball


def _check_capacity_change(state: Allocator, bin_id: int, c_minus: int, c_plus: int) -> None:
    record = state._bins.get(bin_id)
    if record is None:
        raise NotFoundError(f"bin {bin_id} not present")
    if record.capacity != c_plus:
        raise InvalidOperationError(
            f"bin {bin_id} has capacity {record.capacity}, not {c_plus}"
        )
    if not 0 <= c_minus <= c_plus:
        raise InvalidOperationError("need 0 <= c_minus <= c_plus")
    total = sum(b.capacity for b in state._bins.values()) - (c_plus - c_minus)
    if total <= len(state._balls):
        raise InvalidOperationError(
            "capacity change must keep total capacity above total load"
        )


def capacity_change_moves_deterministic(
    state: Allocator,
    bin_id: int,
    c_minus: int,
    c_plus: int,
    *,
    policy: ForwardPolicy | None = None,
    order_seed: int | None = None,
) -> int:
    """Forwarding count for dropping bin_id's capacity c_plus -> c_minus.

    Runs on a clone, leaving `state` untouched. With order_seed set, overfull
    bins and the balls forwarded out of them are chosen at random among the
    legal options instead of by policy — the count is the same either way,
    which is exactly what the determinism tests assert.
    """
    _check_capacity_change(state, bin_id, c_minus, c_plus)
    twin = state.clone(policy=policy)
    bin_ = twin._bins[bin_id]
    twin._set_capacity(bin_, c_minus)
    moves = 0
    if order_seed is None:
        stats = UpdateStats()
        if bin_.load > bin_.capacity:
            twin._settle_forward(bin_, stats)
        moves = stats.forwardings
    else:
        rng = random.Random(order_seed)
        while twin._overfull:
            victim = twin._bins[rng.choice(sorted(twin._overfull))]
            members = sorted(
                (q for grp in victim.groups.values() for q in grp), key=lambda q: q.id
            )
            ball = rng.choice(members)
            nxt = twin._next_bin(victim.key)
            twin._unplace(ball, victim)
            victim.forward_count += 1
            twin._place(ball, nxt)
            moves += 1
    assert not twin._overfull
    return moves


def capacity_increase_fill_moves(
    state: Allocator,
    bin_id: int,
    c_minus: int,
    c_plus: int,
    *,
    policy: ForwardPolicy | None = None,
) -> int:
    """Hole-fill moves for restoring bin_id's capacity c_minus -> c_plus.

    Measured on a clone that has already settled the corresponding decrease;
    the paired determinism lemma bounds this by the decrease's count.
    """
    _check_capacity_change(state, bin_id, c_minus, c_plus)
    twin = state.clone(policy=policy)
    bin_ = twin._bins[bin_id]
    stats = UpdateStats()
    twin._set_capacity(bin_, c_minus)
    if bin_.load > bin_.capacity:
        twin._settle_forward(bin_, stats)
    up = UpdateStats()
    while bin_.capacity < c_plus:
        twin._set_capacity(bin_, bin_.capacity + 1)
        if bin_.forward_count > 0:
            twin._fill_cascade(bin_, up)
    return up.forwardings

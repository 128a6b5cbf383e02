"""Brute-force reference allocator used as ground truth in tests.

Everything here recomputes placements from scratch with no indexes or
incremental state: simple insertions walk the sorted bin list directly.
Deliberately O(m*n) per allocation — it is a fixture, not a fast path.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import EmptySystemError, InfeasibleError


class OracleOrder(Enum):
    """Canonical insertion order: ascending permuted id over the snapshot's permutation."""

    PERMUTED_ID_ASCENDING = "permuted"


@dataclass(frozen=True)
class Snapshot:
    """A bare (balls, bins, capacities) configuration.

    ``permutation`` carries the (a, b, p) of pi(x) = (a*x + b) mod p when the
    canonical order is wanted; plain load checks don't need it.
    """

    balls: dict[int, int]  # ball id -> position
    bins: dict[int, tuple[int, int]]  # bin id -> (position, capacity)
    permutation: tuple[int, int, int] | None = None


@dataclass
class OracleResult:
    placement: dict[int, int]  # ball id -> residence bin id
    loads: dict[int, int]  # bin id -> load (every bin present)

    def full_bins(self, snapshot: Snapshot) -> set[int]:
        return {b for b, load in self.loads.items() if load == snapshot.bins[b][1]}


def _sorted_bin_keys(snapshot: Snapshot) -> list[tuple[int, int, int]]:
    return sorted((pos, 1, bid) for bid, (pos, _cap) in snapshot.bins.items())


def _check_feasible(snapshot: Snapshot) -> None:
    if not snapshot.bins:
        if snapshot.balls:
            raise EmptySystemError("snapshot has balls but no bins")
        return
    total = sum(cap for _pos, cap in snapshot.bins.values())
    if total < len(snapshot.balls):
        raise InfeasibleError(
            f"total capacity {total} < ball count {len(snapshot.balls)}"
        )


def oracle_allocate(
    snapshot: Snapshot,
    order: OracleOrder | Sequence[int] = OracleOrder.PERMUTED_ID_ASCENDING,
) -> OracleResult:
    """Simple insertions in the given order; returns placements and loads.

    ``order`` is either an explicit ball-id sequence or the canonical
    ascending-permuted-id order (which requires snapshot.permutation).
    """
    _check_feasible(snapshot)
    if isinstance(order, OracleOrder):
        if snapshot.permutation is None:
            raise ValueError("canonical order requires snapshot.permutation")
        a, b, p = snapshot.permutation
        sequence = sorted(snapshot.balls, key=lambda x: (a * x + b) % p)
    else:
        sequence = list(order)
        if set(sequence) != set(snapshot.balls):
            raise ValueError("order must be a permutation of the snapshot's ball ids")

    bin_keys = _sorted_bin_keys(snapshot)
    n = len(bin_keys)
    caps = {bid: cap for bid, (_pos, cap) in snapshot.bins.items()}
    loads = {bid: 0 for bid in snapshot.bins}
    placement: dict[int, int] = {}
    for ball_id in sequence:
        bkey = (snapshot.balls[ball_id], 0, ball_id)
        idx = bisect_left(bin_keys, bkey)
        if idx == n:
            idx = 0
        steps = 0
        while loads[bin_keys[idx][2]] == caps[bin_keys[idx][2]]:
            idx += 1
            if idx == n:
                idx = 0
            steps += 1
            if steps > n:
                raise AssertionError("walk failed to find a non-full bin")
        bid = bin_keys[idx][2]
        loads[bid] += 1
        placement[ball_id] = bid
    return OracleResult(placement=placement, loads=loads)


def direct_hash_counts(snapshot: Snapshot) -> dict[int, int]:
    """How many balls hash directly to each bin (successor of the ball point)."""
    bin_keys = _sorted_bin_keys(snapshot)
    n = len(bin_keys)
    counts = {bid: 0 for bid in snapshot.bins}
    if n == 0:
        if snapshot.balls:
            raise EmptySystemError("snapshot has balls but no bins")
        return counts
    for ball_id, pos in snapshot.balls.items():
        idx = bisect_left(bin_keys, (pos, 0, ball_id))
        if idx == n:
            idx = 0
        counts[bin_keys[idx][2]] += 1
    return counts


def oracle_full_check(snapshot: Snapshot) -> set[int]:
    """Full-bin set via the interval condition, independent of any allocation.

    A bin is full iff some interval of consecutive bins ending at it receives
    at least its total capacity in directly-hashing balls.
    """
    _check_feasible(snapshot)
    bin_keys = _sorted_bin_keys(snapshot)
    n = len(bin_keys)
    direct = direct_hash_counts(snapshot)
    full: set[int] = set()
    for j in range(n):
        got = 0
        cap = 0
        for k in range(n):
            bid = bin_keys[(j - k) % n][2]
            got += direct[bid]
            cap += snapshot.bins[bid][1]
            if got >= cap:
                full.add(bin_keys[j][2])
                break
    return full


def oracle_nonfull_loads(
    snapshot: Snapshot, full: set[int] | None = None
) -> dict[int, int]:
    """Loads of non-full bins from the preceding-full-run formula.

    load(b) = balls hashing into the maximal run of consecutive full bins
    immediately before b, plus b itself, minus that run's total capacity.
    """
    if full is None:
        full = oracle_full_check(snapshot)
    bin_keys = _sorted_bin_keys(snapshot)
    n = len(bin_keys)
    direct = direct_hash_counts(snapshot)
    loads: dict[int, int] = {}
    for j, key in enumerate(bin_keys):
        bid = key[2]
        if bid in full:
            continue
        got = direct[bid]
        run_cap = 0
        k = 1
        while k < n:
            prev = bin_keys[(j - k) % n][2]
            if prev not in full:
                break
            got += direct[prev]
            run_cap += snapshot.bins[prev][1]
            k += 1
        loads[bid] = got - run_cap
    return loads


def exhaustive_snapshots(
    n_bins: int,
    n_balls: int,
    range_bits: int,
    capacities: Iterable[int],
) -> Iterable[Snapshot]:
    """Every snapshot over all position assignments for fixed counts/caps.

    Exponential in (n_bins + n_balls) * range_bits; only sensible tiny.
    """
    from itertools import product

    caps = list(capacities)
    if len(caps) != n_bins:
        raise ValueError("one capacity per bin required")
    r = 1 << range_bits
    positions = range(r)
    for combo in product(positions, repeat=n_bins + n_balls):
        bins = {i: (combo[i], caps[i]) for i in range(n_bins)}
        balls = {100 + i: combo[n_bins + i] for i in range(n_balls)}
        yield Snapshot(balls=balls, bins=bins)

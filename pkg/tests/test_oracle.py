"""Reference allocator: order invariance, full-bin law, load formula."""

import random

import pytest

from ringload.errors import EmptySystemError, InfeasibleError
from ringload.oracle import (
    OracleOrder,
    Snapshot,
    direct_hash_counts,
    exhaustive_snapshots,
    oracle_allocate,
    oracle_full_check,
    oracle_nonfull_loads,
)


def _chain_snapshot():
    bins = {1: (10, 1), 2: (20, 1), 3: (30, 1)}
    balls = {100: 15, 101: 15, 102: 15}
    return Snapshot(balls=balls, bins=bins)


def test_forwarding_chain_wraps():
    snap = _chain_snapshot()
    res = oracle_allocate(snap, order=[100, 101, 102])
    assert res.placement == {100: 2, 101: 3, 102: 1}
    assert res.loads == {1: 1, 2: 1, 3: 1}
    assert res.full_bins(snap) == {1, 2, 3}


def test_ball_at_bin_position_lands_there():
    snap = Snapshot(balls={100: 20}, bins={1: (10, 1), 2: (20, 1)})
    res = oracle_allocate(snap, order=[100])
    assert res.placement[100] == 2


def test_loads_are_order_invariant():
    rng = random.Random(5)
    bins = {i: (rng.randrange(64), rng.randrange(1, 4)) for i in range(1, 7)}
    balls = {100 + i: rng.randrange(64) for i in range(12)}
    snap = Snapshot(balls=balls, bins=bins)
    ids = list(balls)
    base = oracle_allocate(snap, order=ids).loads
    for _ in range(10):
        rng.shuffle(ids)
        assert oracle_allocate(snap, order=ids).loads == base


def test_placement_depends_on_order():
    snap = _chain_snapshot()
    a = oracle_allocate(snap, order=[100, 101, 102]).placement
    b = oracle_allocate(snap, order=[102, 101, 100]).placement
    assert a != b  # loads agree, identities do not


def test_canonical_order_uses_permutation():
    # pi(x) = (1*x + 0) mod p reduces to ascending ball id
    snap = Snapshot(
        balls={100: 15, 101: 15, 102: 15},
        bins={1: (10, 1), 2: (20, 1), 3: (30, 1)},
        permutation=(1, 0, 1009),
    )
    res = oracle_allocate(snap)
    assert res.placement == {100: 2, 101: 3, 102: 1}


def test_canonical_order_without_permutation_rejected():
    with pytest.raises(ValueError):
        oracle_allocate(_chain_snapshot())


def test_order_must_be_permutation():
    snap = _chain_snapshot()
    with pytest.raises(ValueError):
        oracle_allocate(snap, order=[100, 101])
    with pytest.raises(ValueError):
        oracle_allocate(snap, order=[100, 101, 101])
    with pytest.raises(ValueError):
        oracle_allocate(snap, order=[100, 101, 999])


def test_balls_without_bins_rejected():
    snap = Snapshot(balls={100: 0}, bins={})
    with pytest.raises(EmptySystemError):
        oracle_allocate(snap, order=[100])
    with pytest.raises(EmptySystemError):
        direct_hash_counts(snap)


def test_empty_snapshot_allowed():
    res = oracle_allocate(Snapshot(balls={}, bins={}), order=[])
    assert res.placement == {} and res.loads == {}


def test_infeasible_rejected():
    snap = Snapshot(balls={100: 0, 101: 1, 102: 2}, bins={1: (5, 2)})
    with pytest.raises(InfeasibleError):
        oracle_allocate(snap, order=[100, 101, 102])


def test_zero_balls_zero_loads():
    snap = Snapshot(balls={}, bins={1: (10, 2), 2: (20, 1)})
    res = oracle_allocate(snap, order=[])
    assert res.loads == {1: 0, 2: 0}
    assert oracle_full_check(snap) == set()


def test_direct_hash_counts_frozen():
    snap = Snapshot(balls={100: 15, 101: 25, 102: 31}, bins={1: (10, 9), 2: (20, 9)})
    assert direct_hash_counts(snap) == {1: 2, 2: 1}


def test_saturated_system_all_full():
    snap = Snapshot(balls={100: 0, 101: 1, 102: 2}, bins={1: (5, 1), 2: (9, 2)})
    assert oracle_full_check(snap) == {1, 2}
    assert oracle_nonfull_loads(snap) == {}


def _assert_laws_hold(snap):
    ids = sorted(snap.balls)
    res = oracle_allocate(snap, order=ids)
    full = oracle_full_check(snap)
    assert full == res.full_bins(snap)
    nonfull = oracle_nonfull_loads(snap, full)
    for bid, load in res.loads.items():
        if bid not in full:
            assert nonfull[bid] == load


def test_full_check_and_load_formula_exhaustive():
    """Interval condition and run formula agree with allocation on every
    tiny snapshot: 3 bins (caps 2,1,1), 3 balls, 2-bit ring."""
    count = 0
    for snap in exhaustive_snapshots(3, 3, 2, [2, 1, 1]):
        _assert_laws_hold(snap)
        count += 1
    assert count == 4**6


def test_full_check_and_load_formula_randomized():
    rng = random.Random(17)
    for _ in range(300):
        n = rng.randint(1, 6)
        caps = [rng.randint(1, 3) for _ in range(n)]
        m = rng.randint(0, min(sum(caps), 12))
        snap = Snapshot(
            balls={100 + i: rng.randrange(256) for i in range(m)},
            bins={1 + i: (rng.randrange(256), caps[i]) for i in range(n)},
        )
        _assert_laws_hold(snap)


def test_exhaustive_generator_validates_caps():
    with pytest.raises(ValueError):
        next(iter(exhaustive_snapshots(2, 1, 2, [1])))

"""Plain unbounded ring used as the comparison point."""

import random
from collections import Counter

import pytest

from ringload.baseline import PlainRing
from ringload.errors import AlreadyPresentError, EmptySystemError, NotFoundError
from ringload.simulator import baseline_loads


def test_single_bin_takes_everything():
    ring = PlainRing(seed=1)
    ring.add_bin(1)
    for i in range(25):
        ring.insert_ball(100 + i)
    assert ring.loads() == {1: 25}


def test_loads_conserve_balls():
    ring = PlainRing(seed=2)
    for bid in range(1, 9):
        ring.add_bin(bid)
    for i in range(100):
        ring.insert_ball(1000 + i)
    assert sum(ring.loads().values()) == 100
    tally = Counter(ring.placement().values())
    assert ring.loads() == {bid: tally.get(bid, 0) for bid in ring.loads()}


def test_same_seed_same_placement():
    def build():
        ring = PlainRing(seed=3)
        for bid in range(1, 6):
            ring.add_bin(bid)
        for i in range(40):
            ring.insert_ball(1000 + i)
        return ring.placement()

    assert build() == build()


def test_placement_is_pure_after_membership_churn():
    """After any add/remove history, every ball sits exactly where a fresh
    assignment of its id would put it."""
    rng = random.Random(5)
    ring = PlainRing(seed=5)
    bins, balls = [], []
    next_bin, next_ball = 1, 1000
    for _ in range(300):
        r = rng.random()
        if not bins or r < 0.35:
            ring.add_bin(next_bin)
            bins.append(next_bin)
            next_bin += 1
        elif r < 0.6:
            ring.insert_ball(next_ball)
            balls.append(next_ball)
            next_ball += 1
        elif r < 0.8 and len(bins) > 1:
            victim = rng.choice(bins)
            ring.remove_bin(victim)
            bins.remove(victim)
        elif balls:
            victim = rng.choice(balls)
            ring.delete_ball(victim)
            balls.remove(victim)
    placement = ring.placement()
    fresh = PlainRing(seed=5)
    for bid in bins:
        fresh.add_bin(bid)
    for qid in balls:
        fresh.insert_ball(qid)
    assert placement == fresh.placement()


def test_error_paths():
    ring = PlainRing(seed=7)
    with pytest.raises(EmptySystemError):
        ring.insert_ball(100)
    ring.add_bin(1)
    with pytest.raises(AlreadyPresentError):
        ring.add_bin(1)
    ring.insert_ball(100)
    with pytest.raises(AlreadyPresentError):
        ring.insert_ball(100)
    with pytest.raises(NotFoundError):
        ring.delete_ball(200)
    with pytest.raises(NotFoundError):
        ring.remove_bin(2)
    with pytest.raises(EmptySystemError):
        ring.remove_bin(1)  # still holds a ball
    ring.delete_ball(100)
    ring.remove_bin(1)
    assert ring.bin_count == 0


def test_max_load_grows_with_system_size():
    """Without load bounds the heaviest bin keeps getting heavier as n grows
    (m = n throughout); the average over a dozen seeds makes that stable."""
    sizes = (200, 1000, 8000)
    means = []
    for n in sizes:
        tops = [baseline_loads(n, seed)[0] for seed in range(12)]
        means.append(sum(tops) / len(tops))
    assert means[0] < means[1] < means[2], means


def test_baseline_loads_sorted_and_conserving():
    loads = baseline_loads(500, seed=11)
    assert loads == sorted(loads, reverse=True)
    assert sum(loads) == 500
    assert len(loads) == 500

"""Randomized cross-checks of the allocator against the brute-force oracle.

Four suites, each over independent random operation sequences on small
systems (position collisions included, which is the point of small ranges):

* loads: after every operation the live load vector must equal the oracle's,
  and the oracle itself must be insensitive to its insertion order.
* full runs: a bin is full exactly when the interval condition says so, and
  non-full loads match the closed-form run formula.
* placement: under HighestPermutedId the full placement map (not just loads)
  must match the canonical oracle after every operation.
* capacity determinism: the forwarding count of a capacity decrease is the
  same under both policies and under random legal forwarding orders, and the
  reverse increase fills at most that many holes.

Each suite returns a CheckReport; the `ringload verify` subcommand runs all
of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .allocator import (
    Allocator,
    ForwardPolicy,
    capacity_change_moves_deterministic,
    capacity_increase_fill_moves,
)
from .hashing import HashKind
from .oracle import OracleOrder, oracle_allocate, oracle_full_check, oracle_nonfull_loads

_C_CHOICES = ("1.05", "1.25", "1.5", "2", "3")
MAX_REPORTED_FAILURES = 12


@dataclass
class CheckReport:
    name: str
    trials: int
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        if len(self.failures) < MAX_REPORTED_FAILURES:
            self.failures.append(message)
        else:
            self.failures.append("... more failures suppressed")

    def line(self) -> str:
        verdict = "ok" if self.ok else "FAIL"
        return f"{self.name}: {verdict} ({self.checks} checks over {self.trials} trials)"


def _random_walk(
    rng: random.Random,
    *,
    steps: int,
    max_n: int,
    max_m: int,
    policy: ForwardPolicy,
    hash_kind: HashKind = HashKind.POLY5,
    range_bits: int = 10,
) -> Iterator[tuple[Allocator, str]]:
    """Yield (allocator, op label) after each random feasible operation."""
    c = Fraction(rng.choice(_C_CHOICES))
    alloc = Allocator(
        c,
        seed=rng.getrandbits(48),
        policy=policy,
        hash_kind=hash_kind,
        range_bits=range_bits,
    )
    balls: list[int] = []
    bins: list[int] = []
    next_ball = 1000
    next_bin = 1
    alloc.add_bin(next_bin)
    bins.append(next_bin)
    next_bin += 1
    yield alloc, "add_bin"
    for _ in range(steps):
        ops = []
        if len(balls) < max_m:
            ops += ["insert_ball"] * 4
        if balls:
            ops += ["delete_ball"] * 3
        if len(bins) < max_n:
            ops += ["add_bin"] * 2
        if len(bins) > 1:
            ops += ["remove_bin"] * 2
        op = rng.choice(ops)
        if op == "insert_ball":
            alloc.insert_ball(next_ball)
            balls.append(next_ball)
            next_ball += 1
        elif op == "delete_ball":
            j = rng.randrange(len(balls))
            balls[j], balls[-1] = balls[-1], balls[j]
            alloc.delete_ball(balls.pop())
        elif op == "add_bin":
            alloc.add_bin(next_bin)
            bins.append(next_bin)
            next_bin += 1
        else:
            j = rng.randrange(len(bins))
            bins[j], bins[-1] = bins[-1], bins[j]
            alloc.remove_bin(bins.pop())
        yield alloc, op


def check_loads_match_oracle(
    trials: int = 100,
    *,
    max_n: int = 8,
    max_m: int = 32,
    seed: int = 0,
    steps: int = 40,
    shuffles: int = 10,
    range_bits: int = 10,
) -> CheckReport:
    report = CheckReport("loads-vs-oracle", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        policy = ForwardPolicy.HIGHEST_PERMUTED_ID if trial % 2 else ForwardPolicy.NEWEST_BALL
        walk = _random_walk(
            rng, steps=steps, max_n=max_n, max_m=max_m, policy=policy, range_bits=range_bits
        )
        snap = None
        for step, (alloc, op) in enumerate(walk):
            if not alloc.verify_settled().ok:
                report.fail(f"trial {trial} step {step} ({op}): verify_settled failed")
                break
            snap = alloc.snapshot()
            if not snap.balls:
                report.checks += 1
                continue
            want = oracle_allocate(snap).loads
            got = {bid: load for bid, load in alloc.loads().items()}
            if got != want:
                report.fail(f"trial {trial} step {step} ({op}): loads diverge from oracle")
                break
            report.checks += 1
        if snap is not None and snap.balls and report.ok:
            # oracle insertion order must not matter
            ids = list(snap.balls)
            want = oracle_allocate(snap).loads
            for s in range(shuffles):
                rng.shuffle(ids)
                if oracle_allocate(snap, order=list(ids)).loads != want:
                    report.fail(f"trial {trial} shuffle {s}: oracle order changed loads")
                    break
                report.checks += 1
    return report


def check_full_run_lemmas(
    trials: int = 100,
    *,
    max_n: int = 8,
    max_m: int = 32,
    seed: int = 0,
    steps: int = 40,
    range_bits: int = 10,
) -> CheckReport:
    report = CheckReport("full-run-lemmas", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        walk = _random_walk(
            rng,
            steps=steps,
            max_n=max_n,
            max_m=max_m,
            policy=ForwardPolicy.HIGHEST_PERMUTED_ID,
            range_bits=range_bits,
        )
        snap = None
        for alloc, _op in walk:
            snap = alloc.snapshot()
        if snap is None or not snap.balls:
            continue
        res = oracle_allocate(snap)
        want_full = res.full_bins(snap)
        got_full = oracle_full_check(snap)
        if got_full != want_full:
            report.fail(f"trial {trial}: interval condition disagrees on full set")
            continue
        report.checks += 1
        nonfull = oracle_nonfull_loads(snap, full=got_full)
        for bid, load in nonfull.items():
            if res.loads[bid] != load:
                report.fail(f"trial {trial}: run formula wrong for bin {bid}")
                break
        else:
            report.checks += 1
    return report


def check_placement_history_independence(
    trials: int = 100,
    *,
    max_n: int = 8,
    max_m: int = 32,
    seed: int = 0,
    steps: int = 40,
    range_bits: int = 10,
) -> CheckReport:
    report = CheckReport("placement-vs-oracle", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        walk = _random_walk(
            rng,
            steps=steps,
            max_n=max_n,
            max_m=max_m,
            policy=ForwardPolicy.HIGHEST_PERMUTED_ID,
            range_bits=range_bits,
        )
        for step, (alloc, op) in enumerate(walk):
            if not alloc.ball_count:
                report.checks += 1
                continue
            want = oracle_allocate(alloc.snapshot()).placement
            if alloc.placement() != want:
                report.fail(f"trial {trial} step {step} ({op}): placement diverges")
                break
            report.checks += 1
    return report


def check_capacity_determinism(
    trials: int = 100,
    *,
    max_n: int = 8,
    max_m: int = 32,
    seed: int = 0,
    steps: int = 30,
    random_orders: int = 5,
    range_bits: int = 10,
) -> CheckReport:
    report = CheckReport("capacity-determinism", trials)
    rng = random.Random(seed)
    for trial in range(trials):
        policy = ForwardPolicy.HIGHEST_PERMUTED_ID if trial % 2 else ForwardPolicy.NEWEST_BALL
        walk = _random_walk(
            rng, steps=steps, max_n=max_n, max_m=max_m, policy=policy, range_bits=range_bits
        )
        alloc = None
        for alloc, _op in walk:
            pass
        assert alloc is not None
        total = sum(alloc.capacity_of(b) for b in alloc.bin_ids())
        m = alloc.ball_count
        candidates = [
            b
            for b in alloc.bin_ids()
            if alloc.capacity_of(b) > 0 and total - alloc.capacity_of(b) > m
        ]
        if not candidates:
            continue
        bid = rng.choice(candidates)
        c_plus = alloc.capacity_of(bid)
        floor = max(0, m + 1 - (total - c_plus))
        c_minus = rng.randint(floor, c_plus)
        base = capacity_change_moves_deterministic(
            alloc, bid, c_minus, c_plus, policy=ForwardPolicy.HIGHEST_PERMUTED_ID
        )
        other = capacity_change_moves_deterministic(
            alloc, bid, c_minus, c_plus, policy=ForwardPolicy.NEWEST_BALL
        )
        if other != base:
            report.fail(f"trial {trial}: policies disagree ({base} vs {other})")
            continue
        bad = False
        for k in range(random_orders):
            scrambled = capacity_change_moves_deterministic(
                alloc, bid, c_minus, c_plus, order_seed=rng.getrandbits(32) + k
            )
            if scrambled != base:
                report.fail(f"trial {trial} order {k}: count changed ({base} vs {scrambled})")
                bad = True
                break
        if bad:
            continue
        report.checks += 1
        refill = capacity_increase_fill_moves(alloc, bid, c_minus, c_plus)
        if refill > base:
            report.fail(f"trial {trial}: refill {refill} exceeds decrease count {base}")
            continue
        report.checks += 1
    return report


def run_all_checks(
    trials: int = 100,
    *,
    max_n: int = 8,
    max_m: int = 32,
    seed: int = 0,
) -> list[CheckReport]:
    return [
        check_loads_match_oracle(trials, max_n=max_n, max_m=max_m, seed=seed),
        check_full_run_lemmas(trials, max_n=max_n, max_m=max_m, seed=seed + 1),
        check_placement_history_independence(trials, max_n=max_n, max_m=max_m, seed=seed + 2),
        check_capacity_determinism(trials, max_n=max_n, max_m=max_m, seed=seed + 3),
    ]

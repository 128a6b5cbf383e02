"""Grid simulations over (n, m/n ratio, epsilon) cells.

Each cell builds a system of n bins and m = n*ratio balls, then applies a
random operation mix: ball inserts and deletes with equal probability, bin
adds and removes each at one tenth the ball rate, with floors so neither the
ball nor the bin count ever hits zero. Per-operation movement statistics are
aggregated by operation type and written as CSV rows.

Loads are policy independent; per-operation movement counts are not, so the
policy is part of every cell spec and of every CSV row.
"""

from __future__ import annotations

import csv
import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .allocator import Allocator, ForwardPolicy
from .baseline import PlainRing
from .hashing import HashKind

DEFAULT_N = (10, 20, 40, 70, 100, 150, 200, 300, 450, 600, 800, 1000, 2000)
DEFAULT_RATIOS = ("0.5", "0.8", "1", "1.2", "1.5", "2", "3", "5", "10")
DEFAULT_EPSILONS = (
    "0.05", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9",
    "1", "1.2", "1.5", "1.8", "2", "2.3", "2.5", "2.8", "3",
)

CSV_HEADER = (
    "cell_id,n,ratio,epsilon,policy,hash,seed,op_type,"
    "mean_moves,std_moves,mean_visits,max_norm_load,max_run,f_bound"
)

OP_TYPES = ("insert_ball", "delete_ball", "add_bin", "remove_bin")


def f_bound(epsilon: float) -> float:
    """Per-insertion expected-move bound: 2/eps^2 below eps=1, else 1 + ln(1+eps)/(1+eps)."""
    eps = float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if eps < 1:
        return 2.0 / (eps * eps)
    return 1.0 + math.log(1.0 + eps) / (1.0 + eps)


def exact_fraction(text) -> Fraction:
    """Parse a decimal string (or int/Fraction) exactly; floats are rejected."""
    if isinstance(text, float):
        raise TypeError("pass decimals as strings so they stay exact")
    return Fraction(text)


def cell_identifier(n: int, ratio: Fraction, epsilon: Fraction) -> str:
    return f"n{n}-r{_num(ratio)}-e{_num(epsilon)}"


def _num(x: Fraction) -> str:
    """Short decimal form for grid fractions (all are exact in binary float)."""
    f = float(x)
    return format(f, ".10g")


def cell_seed(master_seed: int, cell_id: str) -> int:
    digest = hashlib.sha256(f"{master_seed}|{cell_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class CellSpec:
    n: int
    ratio: Fraction
    epsilon: Fraction
    ops: int
    seed: int
    policy: ForwardPolicy = ForwardPolicy.HIGHEST_PERMUTED_ID
    hash_kind: HashKind = HashKind.POLY5
    range_bits: int = 32

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        m = self.n * self.ratio
        if m.denominator != 1 or m < 1:
            raise ValueError(f"n*ratio must be a positive integer, got {m}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def m(self) -> int:
        return int(self.n * self.ratio)

    @property
    def cell_id(self) -> str:
        return cell_identifier(self.n, self.ratio, self.epsilon)


@dataclass
class OpStats:
    count: int = 0
    moves_sum: int = 0
    moves_sumsq: int = 0
    visits_sum: int = 0

    def add(self, moves: int, visits: int) -> None:
        self.count += 1
        self.moves_sum += moves
        self.moves_sumsq += moves * moves
        self.visits_sum += visits

    @property
    def mean_moves(self) -> float:
        return self.moves_sum / self.count if self.count else 0.0

    @property
    def std_moves(self) -> float:
        if self.count < 2:
            return 0.0
        mean = self.moves_sum / self.count
        var = (self.moves_sumsq - self.count * mean * mean) / (self.count - 1)
        return math.sqrt(max(var, 0.0))

    @property
    def mean_visits(self) -> float:
        return self.visits_sum / self.count if self.count else 0.0


@dataclass
class CellResult:
    spec: CellSpec
    op_stats: dict[str, OpStats]
    max_norm_load: float
    max_run: int
    final_m: int
    final_n: int
    verify_ok: bool
    distribution: list[float] = field(default_factory=list)

    @property
    def f_bound(self) -> float:
        return f_bound(float(self.spec.epsilon))


def run_cell(
    spec: CellSpec,
    *,
    collect_distribution: bool = False,
    verify_every: int = 250,
) -> CellResult:
    rng = random.Random(cell_seed(spec.seed, spec.cell_id))
    alloc = Allocator(
        1 + spec.epsilon,
        seed=cell_seed(spec.seed, spec.cell_id + "|alloc"),
        policy=spec.policy,
        hash_kind=spec.hash_kind,
        range_bits=spec.range_bits,
    )
    bins = list(range(1, spec.n + 1))
    for bid in bins:
        alloc.add_bin(bid)
    next_bin = spec.n + 1
    balls = list(range(1_000_000, 1_000_000 + spec.m))
    alloc.bulk_build(balls)
    next_ball = 1_000_000 + spec.m

    stats = {op: OpStats() for op in OP_TYPES}
    max_run = 0
    verify_ok = True
    for i in range(spec.ops):
        draw = rng.randrange(22)
        if draw < 10:
            op = "insert_ball"
        elif draw < 20:
            # floor: never delete the last ball
            op = "delete_ball" if len(balls) > 1 else "insert_ball"
        elif draw < 21:
            op = "add_bin"
        else:
            # floor: never remove the last bin
            op = "remove_bin" if len(bins) > 1 else "add_bin"

        if op == "insert_ball":
            s = alloc.insert_ball(next_ball)
            balls.append(next_ball)
            next_ball += 1
        elif op == "delete_ball":
            j = rng.randrange(len(balls))
            balls[j], balls[-1] = balls[-1], balls[j]
            s = alloc.delete_ball(balls.pop())
        elif op == "add_bin":
            s = alloc.add_bin(next_bin)
            bins.append(next_bin)
            next_bin += 1
        else:
            j = rng.randrange(len(bins))
            bins[j], bins[-1] = bins[-1], bins[j]
            s = alloc.remove_bin(bins.pop())

        stats[op].add(s.balls_moved, s.bins_visited)
        if s.max_run_observed > max_run:
            max_run = s.max_run_observed
        if verify_every and (i + 1) % verify_every == 0:
            if not alloc.verify_settled(recount=False).ok:
                verify_ok = False
    if not alloc.verify_settled(recount=True).ok:
        verify_ok = False

    loads = sorted(alloc.loads().values(), reverse=True)
    m, n = alloc.ball_count, alloc.bin_count
    mean_load = m / n
    max_norm = loads[0] / mean_load if loads else 0.0
    dist = [x / mean_load for x in loads] if collect_distribution else []
    return CellResult(
        spec=spec,
        op_stats=stats,
        max_norm_load=max_norm,
        max_run=max_run,
        final_m=m,
        final_n=n,
        verify_ok=verify_ok,
        distribution=dist,
    )


def result_rows(result: CellResult) -> list[list[str]]:
    spec = result.spec
    rows = []
    for op in OP_TYPES:
        st = result.op_stats[op]
        if st.count == 0:
            continue
        rows.append(
            [
                spec.cell_id,
                str(spec.n),
                _num(spec.ratio),
                _num(spec.epsilon),
                spec.policy.value,
                spec.hash_kind.value,
                str(spec.seed),
                op,
                format(st.mean_moves, ".10g"),
                format(st.std_moves, ".10g"),
                format(st.mean_visits, ".10g"),
                format(result.max_norm_load, ".10g"),
                str(result.max_run),
                format(result.f_bound, ".10g"),
            ]
        )
    return rows


def write_results_csv(results: Iterable[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for result in results:
            writer.writerows(result_rows(result))


def write_distribution_csv(blocks: Iterable[Sequence[float]], path) -> None:
    """Write one or more descending load distributions as stacked blocks."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank_fraction", "normalized_load"])
        for block in blocks:
            size = len(block)
            for i, value in enumerate(block):
                writer.writerow([format((i + 1) / size, ".10g"), format(value, ".10g")])


def run_grid(
    ns: Sequence[int] = DEFAULT_N,
    ratios: Sequence = DEFAULT_RATIOS,
    epsilons: Sequence = DEFAULT_EPSILONS,
    *,
    ops: int = 1000,
    seed: int = 0,
    policy: ForwardPolicy = ForwardPolicy.HIGHEST_PERMUTED_ID,
    hash_kind: HashKind = HashKind.POLY5,
    range_bits: int = 32,
    out_csv=None,
    dist_dir=None,
    verify_every: int = 250,
) -> list[CellResult]:
    """Run every grid cell in order and optionally write the CSV outputs.

    Cell seeds depend only on (seed, cell id), so restricting the grid to a
    subset of cells reproduces exactly the rows the full grid would produce.
    """
    ratio_fracs = [exact_fraction(r) for r in ratios]
    eps_fracs = [exact_fraction(e) for e in epsilons]
    results = []
    for n in ns:
        for ratio in ratio_fracs:
            for eps in eps_fracs:
                spec = CellSpec(
                    n=n,
                    ratio=ratio,
                    epsilon=eps,
                    ops=ops,
                    seed=seed,
                    policy=policy,
                    hash_kind=hash_kind,
                    range_bits=range_bits,
                )
                result = run_cell(
                    spec,
                    collect_distribution=dist_dir is not None,
                    verify_every=verify_every,
                )
                results.append(result)
    if out_csv is not None:
        write_results_csv(results, out_csv)
    if dist_dir is not None:
        directory = Path(dist_dir)
        directory.mkdir(parents=True, exist_ok=True)
        for result in results:
            write_distribution_csv(
                [result.distribution], directory / f"{result.spec.cell_id}.csv"
            )
    return results


@dataclass(frozen=True)
class BenchResult:
    ops: int
    build_seconds: float
    churn_seconds: float
    ops_per_sec: float
    mean_moves: float
    p99_moves: int


def run_bench(
    n: int,
    ratio,
    epsilon,
    *,
    ops: int = 10_000,
    seed: int = 0,
    policy: ForwardPolicy = ForwardPolicy.HIGHEST_PERMUTED_ID,
    hash_kind: HashKind = HashKind.POLY5,
) -> BenchResult:
    """Time the churn loop of a single cell and report throughput and p99 moves."""
    import time

    spec = CellSpec(
        n=n,
        ratio=exact_fraction(ratio),
        epsilon=exact_fraction(epsilon),
        ops=ops,
        seed=seed,
        policy=policy,
        hash_kind=hash_kind,
    )
    rng = random.Random(cell_seed(seed, spec.cell_id))
    alloc = Allocator(
        1 + spec.epsilon,
        seed=cell_seed(seed, spec.cell_id + "|alloc"),
        policy=policy,
        hash_kind=hash_kind,
    )
    t0 = time.perf_counter()
    bins = list(range(1, n + 1))
    for bid in bins:
        alloc.add_bin(bid)
    balls = list(range(1_000_000, 1_000_000 + spec.m))
    alloc.bulk_build(balls)
    t1 = time.perf_counter()
    next_ball = 1_000_000 + spec.m
    next_bin = n + 1
    moves = []
    for _i in range(ops):
        draw = rng.randrange(22)
        if draw < 10 or (10 <= draw < 20 and len(balls) == 1):
            s = alloc.insert_ball(next_ball)
            balls.append(next_ball)
            next_ball += 1
        elif draw < 20:
            j = rng.randrange(len(balls))
            balls[j], balls[-1] = balls[-1], balls[j]
            s = alloc.delete_ball(balls.pop())
        elif draw < 21 or len(bins) == 1:
            s = alloc.add_bin(next_bin)
            bins.append(next_bin)
            next_bin += 1
        else:
            j = rng.randrange(len(bins))
            bins[j], bins[-1] = bins[-1], bins[j]
            s = alloc.remove_bin(bins.pop())
        moves.append(s.balls_moved)
    t2 = time.perf_counter()
    moves.sort()
    return BenchResult(
        ops=ops,
        build_seconds=t1 - t0,
        churn_seconds=t2 - t1,
        ops_per_sec=ops / (t2 - t1) if t2 > t1 else float("inf"),
        mean_moves=sum(moves) / len(moves),
        p99_moves=moves[min(len(moves) - 1, (99 * len(moves)) // 100)],
    )


def baseline_loads(n: int, seed: int, hash_kind: HashKind = HashKind.POLY5) -> list[int]:
    """Descending loads of a plain consistent-hashing ring with m = n."""
    ring = PlainRing(seed=seed, hash_kind=hash_kind)
    for bid in range(1, n + 1):
        ring.add_bin(bid)
    for qid in range(1_000_000, 1_000_000 + n):
        ring.insert_ball(qid)
    return sorted(ring.loads().values(), reverse=True)


def run_baseline_distribution(
    ns: Sequence[int],
    *,
    seed: int = 0,
    hash_kind: HashKind = HashKind.POLY5,
    out_path=None,
) -> list[list[float]]:
    """Normalized plain-hashing load distributions (one block per n)."""
    blocks = []
    for n in ns:
        loads = baseline_loads(n, cell_seed(seed, f"baseline-n{n}"), hash_kind)
        mean = sum(loads) / len(loads)
        blocks.append([x / mean for x in loads])
    if out_path is not None:
        write_distribution_csv(blocks, out_path)
    return blocks

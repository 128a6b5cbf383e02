"""Command line interface: simulate, verify, bench, demo.

Exit codes: 0 on success, 1 when a verification or invariant check fails,
2 on usage errors (argparse). All randomness flows from --seed; the only
environment variable consulted is RINGLOAD_OUT_DIR, the default directory
for outputs when --out style flags are relative or omitted.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .allocator import Allocator, ForwardPolicy
from .hashing import HashKind
from .oracle import oracle_allocate
from .simulator import (
    DEFAULT_EPSILONS,
    DEFAULT_N,
    DEFAULT_RATIOS,
    exact_fraction,
    run_baseline_distribution,
    run_bench,
    run_grid,
)
from .verification import run_all_checks

_POLICIES = {
    "permuted": ForwardPolicy.HIGHEST_PERMUTED_ID,
    "newest": ForwardPolicy.NEWEST_BALL,
}
_HASHES = {
    "poly5": HashKind.POLY5,
    "tab": HashKind.TABULATION,
}


def _fraction_arg(text: str) -> Fraction:
    try:
        value = exact_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return value


def _positive_fraction(text: str) -> Fraction:
    value = _fraction_arg(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma list of ints: {text!r}") from exc


def _fraction_list(text: str) -> list[Fraction]:
    return [_positive_fraction(part) for part in text.split(",") if part]


def _out_dir() -> Path:
    return Path(os.environ.get("RINGLOAD_OUT_DIR", "."))


def _resolve(path_text: str) -> Path:
    path = Path(path_text)
    return path if path.is_absolute() else _out_dir() / path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringload",
        description="Consistent hashing with bounded loads: simulations and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run grid cells and write CSV results")
    sim.add_argument("--n-list", type=_int_list, default=list(DEFAULT_N))
    sim.add_argument("--ratio-list", type=_fraction_list, default=None)
    sim.add_argument("--eps-list", type=_fraction_list, default=None)
    sim.add_argument("--ops", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--hash", choices=sorted(_HASHES), default="poly5")
    sim.add_argument("--policy", choices=sorted(_POLICIES), default="permuted")
    sim.add_argument("--out", default="results.csv")
    sim.add_argument("--dist-out", default=None, help="directory for per-cell load distributions")
    sim.add_argument("--baseline-out", default=None, help="plain-hashing distribution CSV")
    sim.add_argument("--baseline-n-list", type=_int_list, default=[1000])
    sim.add_argument("--verify-every", type=int, default=250)
    sim.set_defaults(func=_cmd_simulate)

    ver = sub.add_parser("verify", help="randomized checks against the brute-force oracle")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--max-n", type=int, default=8)
    ver.add_argument("--max-m", type=int, default=32)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=_cmd_verify)

    ben = sub.add_parser("bench", help="time the operation loop of one cell")
    ben.add_argument("--n", type=int, default=1000)
    ben.add_argument("--ratio", type=_positive_fraction, default=Fraction(1))
    ben.add_argument("--eps", type=_positive_fraction, default=Fraction(1, 2))
    ben.add_argument("--ops", type=int, default=10_000)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--hash", choices=sorted(_HASHES), default="poly5")
    ben.add_argument("--policy", choices=sorted(_POLICIES), default="permuted")
    ben.set_defaults(func=_cmd_bench)

    dem = sub.add_parser("demo", help="tiny worked example with a ring dump")
    dem.add_argument("--n", type=int, default=8)
    dem.add_argument("--eps", type=_positive_fraction, default=Fraction(1, 2))
    dem.set_defaults(func=_cmd_demo)
    return parser


def _cmd_simulate(args) -> int:
    ratios = args.ratio_list if args.ratio_list is not None else [
        exact_fraction(r) for r in DEFAULT_RATIOS
    ]
    epsilons = args.eps_list if args.eps_list is not None else [
        exact_fraction(e) for e in DEFAULT_EPSILONS
    ]
    out_csv = _resolve(args.out)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    dist_dir = _resolve(args.dist_out) if args.dist_out else None
    results = run_grid(
        args.n_list,
        ratios,
        epsilons,
        ops=args.ops,
        seed=args.seed,
        policy=_POLICIES[args.policy],
        hash_kind=_HASHES[args.hash],
        out_csv=out_csv,
        dist_dir=dist_dir,
        verify_every=args.verify_every,
    )
    print(f"simulated {len(results)} cells -> {out_csv}")
    if dist_dir is not None:
        print(f"distributions -> {dist_dir}")
    if args.baseline_out:
        baseline_path = _resolve(args.baseline_out)
        baseline_path.parent.mkdir(parents=True, exist_ok=True)
        run_baseline_distribution(args.baseline_n_list, seed=args.seed, out_path=baseline_path)
        print(f"baseline distributions -> {baseline_path}")
    bad = [r.spec.cell_id for r in results if not r.verify_ok]
    if bad:
        print(f"FAIL: settled-state verification failed in cells: {', '.join(bad[:10])}")
        return 1
    return 0


def _cmd_verify(args) -> int:
    reports = run_all_checks(
        args.trials, max_n=args.max_n, max_m=args.max_m, seed=args.seed
    )
    failed = False
    for report in reports:
        print(report.line())
        for message in report.failures:
            print(f"  {message}")
        failed = failed or not report.ok
    return 1 if failed else 0


def _cmd_bench(args) -> int:
    result = run_bench(
        args.n,
        args.ratio,
        args.eps,
        ops=args.ops,
        seed=args.seed,
        policy=_POLICIES[args.policy],
        hash_kind=_HASHES[args.hash],
    )
    print(f"build: {result.build_seconds:.3f}s")
    print(f"churn: {result.ops} ops in {result.churn_seconds:.3f}s")
    print(f"throughput: {result.ops_per_sec:.0f} ops/sec")
    print(f"mean moves per op: {result.mean_moves:.3f}")
    print(f"p99 moves per op: {result.p99_moves}")
    return 0


def _cmd_demo(args) -> int:
    if args.n < 1:
        print("demo needs at least one bin", file=sys.stderr)
        return 2
    alloc = Allocator(1 + args.eps, seed=42)
    for bid in range(1, args.n + 1):
        alloc.add_bin(bid)
    for qid in range(101, 101 + args.n):
        alloc.insert_ball(qid)

    def dump() -> None:
        print(f"  {'bin':>6} {'position':>12} {'cap':>4} {'load':>5} {'fwd':>4}  residents")
        for bid in sorted(alloc.bin_ids(), key=alloc.bin_position):
            view = alloc.bin_view(bid)
            residents = sorted(q for grp in view.residents.values() for q in grp)
            print(
                f"  {bid:>6} {view.position:>12} {view.capacity:>4}"
                f" {view.load:>5} {view.forward_count:>4}  {residents}"
            )

    print(f"system: {alloc.bin_count} bins, {alloc.ball_count} balls, c = {alloc.c}")
    dump()

    steps = [
        ("insert ball 901", lambda: alloc.insert_ball(901)),
        ("insert ball 902", lambda: alloc.insert_ball(902)),
        ("delete ball 101", lambda: alloc.delete_ball(101)),
        (f"add bin {args.n + 1}", lambda: alloc.add_bin(args.n + 1)),
        ("remove bin 1", lambda: alloc.remove_bin(1)),
    ]
    for label, action in steps:
        stats = action()
        report = alloc.verify_settled()
        want = oracle_allocate(alloc.snapshot()).placement
        match = want == alloc.placement()
        status = "ok" if (report.ok and match) else "MISMATCH"
        print(
            f"{label}: moves={stats.balls_moved} capacity_changes={stats.capacity_changes}"
            f" [{status}]"
        )
        if not (report.ok and match):
            print(f"  verify: {report}")
            return 1
    print("final state:")
    dump()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Consistent hashing with bounded loads.

Balls and bins hash to a cyclic range; each bin takes at most its scheduled
capacity and overflow forwards to the next bins around the cycle. The package
exposes the dynamic allocator, the brute-force oracle it is checked against,
a plain consistent-hashing baseline, and the simulation driver behind the
`ringload` command line tool.
"""

from .allocator import (
    Allocator,
    BallView,
    BinView,
    CapacitySchedule,
    ForwardPolicy,
    SearchResult,
    UpdateStats,
    VerifyReport,
    capacity_change_moves_deterministic,
    capacity_increase_fill_moves,
    compute_schedule,
)
from .baseline import PlainRing
from .errors import (
    AlreadyPresentError,
    EmptySystemError,
    InfeasibleError,
    InvalidOperationError,
    NotFoundError,
    RingLoadError,
)
from .hashing import HashKind, Poly5Family, SplitMix64, TabulationFamily, new_family
from .oracle import (
    OracleOrder,
    OracleResult,
    Snapshot,
    direct_hash_counts,
    oracle_allocate,
    oracle_full_check,
    oracle_nonfull_loads,
)
from .ring import PointKind, RingPoint, SuccessorIndex
from .simulator import CellResult, CellSpec, f_bound, run_baseline_distribution, run_cell, run_grid

__all__ = [
    "Allocator",
    "AlreadyPresentError",
    "BallView",
    "BinView",
    "CapacitySchedule",
    "CellResult",
    "CellSpec",
    "EmptySystemError",
    "ForwardPolicy",
    "HashKind",
    "InfeasibleError",
    "InvalidOperationError",
    "NotFoundError",
    "OracleOrder",
    "OracleResult",
    "PlainRing",
    "PointKind",
    "Poly5Family",
    "RingLoadError",
    "RingPoint",
    "SearchResult",
    "Snapshot",
    "SplitMix64",
    "SuccessorIndex",
    "TabulationFamily",
    "UpdateStats",
    "VerifyReport",
    "capacity_change_moves_deterministic",
    "capacity_increase_fill_moves",
    "compute_schedule",
    "direct_hash_counts",
    "f_bound",
    "new_family",
    "oracle_allocate",
    "oracle_full_check",
    "oracle_nonfull_loads",
    "run_baseline_distribution",
    "run_cell",
    "run_grid",
]

__version__ = "0.1.0"

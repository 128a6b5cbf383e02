"""Simulation cells, CSV emission, seeds, and the movement bound helper."""

import csv
import math
from fractions import Fraction

import pytest

from ringload.simulator import (
    CSV_HEADER,
    OP_TYPES,
    CellSpec,
    OpStats,
    cell_identifier,
    cell_seed,
    exact_fraction,
    f_bound,
    run_baseline_distribution,
    run_bench,
    run_cell,
    run_grid,
    write_distribution_csv,
)


def test_f_bound_frozen_values():
    assert f_bound(0.1) == pytest.approx(200.0)
    assert f_bound(0.3) == pytest.approx(200.0 / 9.0)
    assert f_bound(0.5) == pytest.approx(8.0)
    assert f_bound(0.9) == pytest.approx(2.4691358024691357)
    assert f_bound(1.0) == pytest.approx(1.0 + math.log(2.0) / 2.0)
    assert f_bound(2.0) == pytest.approx(1.0 + math.log(3.0) / 3.0)
    # ln(4)/4 collapses to ln(2)/2: the bound at 3 equals the bound at 1
    assert f_bound(3.0) == f_bound(1.0)


@pytest.mark.parametrize("bad", [0, -0.5])
def test_f_bound_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        f_bound(bad)


def test_exact_fraction():
    assert exact_fraction("0.05") == Fraction(1, 20)
    assert exact_fraction(2) == Fraction(2)
    assert exact_fraction(Fraction(3, 2)) == Fraction(3, 2)
    with pytest.raises(TypeError):
        exact_fraction(0.05)


def test_cell_identifier_format():
    assert cell_identifier(1000, Fraction(1), Fraction(3, 10)) == "n1000-r1-e0.3"
    assert cell_identifier(10, Fraction(1, 2), Fraction(2)) == "n10-r0.5-e2"
    assert cell_identifier(70, Fraction(10), Fraction(1, 20)) == "n70-r10-e0.05"


def test_cell_seed_is_stable_and_distinct():
    a = cell_seed(0, "n10-r1-e1")
    assert a == cell_seed(0, "n10-r1-e1")
    assert a != cell_seed(1, "n10-r1-e1")
    assert a != cell_seed(0, "n10-r1-e2")
    assert 0 <= a < (1 << 64)


def test_cellspec_validation():
    good = CellSpec(n=10, ratio=Fraction(3, 2), epsilon=Fraction(1), ops=5, seed=0)
    assert good.m == 15
    assert good.cell_id == "n10-r1.5-e1"
    with pytest.raises(ValueError):
        CellSpec(n=0, ratio=Fraction(1), epsilon=Fraction(1), ops=5, seed=0)
    with pytest.raises(ValueError):
        CellSpec(n=10, ratio=Fraction(1, 3), epsilon=Fraction(1), ops=5, seed=0)
    with pytest.raises(ValueError):
        CellSpec(n=1, ratio=Fraction(1, 2), epsilon=Fraction(1), ops=5, seed=0)
    with pytest.raises(ValueError):
        CellSpec(n=10, ratio=Fraction(1), epsilon=Fraction(0), ops=5, seed=0)


def test_opstats_edge_cases():
    st = OpStats()
    assert st.mean_moves == 0.0 and st.std_moves == 0.0 and st.mean_visits == 0.0
    st.add(1, 2)
    assert st.std_moves == 0.0
    st.add(3, 4)
    assert st.mean_moves == 2.0
    assert st.std_moves == pytest.approx(math.sqrt(2.0))
    assert st.mean_visits == 3.0


def test_zero_churn_cell():
    spec = CellSpec(n=10, ratio=Fraction(2), epsilon=Fraction(1, 2), ops=0, seed=3)
    result = run_cell(spec)
    assert result.verify_ok
    assert result.final_m == 20 and result.final_n == 10
    assert all(result.op_stats[op].count == 0 for op in OP_TYPES)
    # hard cap: max load <= ceil(c*m/n) means normalized <= c + n/m
    assert result.max_norm_load <= 1.5 + 10 / 20 + 1e-9


def test_run_cell_conserves_counts():
    spec = CellSpec(n=12, ratio=Fraction(2), epsilon=Fraction(1), ops=300, seed=5)
    result = run_cell(spec)
    assert result.verify_ok
    delta_balls = result.op_stats["insert_ball"].count - result.op_stats["delete_ball"].count
    delta_bins = result.op_stats["add_bin"].count - result.op_stats["remove_bin"].count
    assert result.final_m == spec.m + delta_balls
    assert result.final_n == spec.n + delta_bins
    assert sum(result.op_stats[op].count for op in OP_TYPES) == 300


def test_distribution_collection():
    spec = CellSpec(n=10, ratio=Fraction(3), epsilon=Fraction(1, 2), ops=0, seed=7)
    result = run_cell(spec, collect_distribution=True)
    dist = result.distribution
    assert len(dist) == 10
    assert dist == sorted(dist, reverse=True)
    assert sum(dist) / len(dist) == pytest.approx(1.0)  # normalized by mean load
    assert dist[0] == pytest.approx(result.max_norm_load)


def test_grid_csv_round_trip(tmp_path):
    out = tmp_path / "results.csv"
    run_grid([10], ["1"], ["0.5", "1"], ops=120, seed=2, out_csv=out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER.split(",")
    assert len(rows[0]) == 14
    body = rows[1:]
    assert body, "expected at least one data row"
    for row in body:
        assert len(row) == 14
        assert row[1] == "10"
        assert row[7] in OP_TYPES
        float(row[8]), float(row[9]), float(row[10]), float(row[11]), float(row[13])
        int(row[12])
    # both cells contributed rows
    assert {row[0] for row in body} == {"n10-r1-e0.5", "n10-r1-e1"}


def test_grid_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_grid([10], ["2"], ["1"], ops=150, seed=9, out_csv=a)
    run_grid([10], ["2"], ["1"], ops=150, seed=9, out_csv=b)
    assert a.read_bytes() == b.read_bytes()


def test_grid_subset_reproduces_rows(tmp_path):
    full, part = tmp_path / "full.csv", tmp_path / "part.csv"
    run_grid([10], ["1", "2"], ["1"], ops=120, seed=4, out_csv=full)
    run_grid([10], ["2"], ["1"], ops=120, seed=4, out_csv=part)
    with open(full, newline="") as fh:
        full_rows = [r for r in csv.reader(fh)][1:]
    with open(part, newline="") as fh:
        part_rows = [r for r in csv.reader(fh)][1:]
    wanted = [r for r in full_rows if r[0] == "n10-r2-e1"]
    assert part_rows == wanted


def test_grid_writes_distribution_files(tmp_path):
    dist_dir = tmp_path / "dist"
    run_grid([10], ["1"], ["1"], ops=40, seed=6, dist_dir=dist_dir)
    path = dist_dir / "n10-r1-e1.csv"
    assert path.exists()
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rank_fraction", "normalized_load"]
    fracs = [float(r[0]) for r in rows[1:]]
    assert fracs[-1] == pytest.approx(1.0)
    assert fracs == sorted(fracs)


def test_write_distribution_blocks(tmp_path):
    path = tmp_path / "d.csv"
    write_distribution_csv([[2.0, 1.0, 0.5, 0.5], [1.5, 0.5]], path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    assert [(float(a), float(b)) for a, b in rows] == [
        (0.25, 2.0),
        (0.5, 1.0),
        (0.75, 0.5),
        (1.0, 0.5),
        (0.5, 1.5),
        (1.0, 0.5),
    ]


def test_baseline_distribution_single_bin(tmp_path):
    path = tmp_path / "base.csv"
    blocks = run_baseline_distribution([1], seed=0, out_path=path)
    assert blocks == [[1.0]]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [["rank_fraction", "normalized_load"], ["1", "1"]]


def test_baseline_distribution_normalization(tmp_path):
    blocks = run_baseline_distribution([50], seed=1, out_path=tmp_path / "b.csv")
    (block,) = blocks
    assert len(block) == 50
    assert sum(block) / 50 == pytest.approx(1.0)
    assert block == sorted(block, reverse=True)


def test_bench_deterministic_movement():
    a = run_bench(20, "1", "1", ops=200, seed=3)
    b = run_bench(20, "1", "1", ops=200, seed=3)
    assert a.ops == b.ops == 200
    assert a.mean_moves == b.mean_moves
    assert a.p99_moves == b.p99_moves
    assert a.ops_per_sec > 0

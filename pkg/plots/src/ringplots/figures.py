"""Figure builders over the simulator's published CSV schemas.

Two input shapes exist:

* results CSV — one row per (cell, op type) with movement statistics and
  the per-epsilon bound column ``f_bound``;
* distribution CSV — ``rank_fraction,normalized_load`` rows, descending
  loads; several curves may be stacked in one file, each restarting
  rank_fraction from the bottom.

Everything renders through the object-oriented matplotlib API with a fixed
figure size and no embedded timestamps, so output bytes depend only on the
input CSV.
"""

from __future__ import annotations

import csv
from matplotlib.figure import Figure

RESULTS_HEADER = [
    "cell_id",
    "n",
    "ratio",
    "epsilon",
    "policy",
    "hash",
    "seed",
    "op_type",
    "mean_moves",
    "std_moves",
    "mean_visits",
    "max_norm_load",
    "max_run",
    "f_bound",
]

DIST_HEADER = ["rank_fraction", "normalized_load"]

KINDS = ("load_dist", "load_dist_baseline", "ball_moves", "bin_moves")

_BALL_OPS = ("insert_ball", "delete_ball")
_BIN_OPS = ("add_bin", "remove_bin")

FIGSIZE = (6.4, 4.4)
DPI = 110


class SchemaError(ValueError):
    """The CSV does not match the published schema."""


def _float(text: str, path, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaError(
            f"{path}: row {row}: column {column!r} is not numeric: {text!r}"
        ) from None


def read_distribution(path) -> list[list[tuple[float, float]]]:
    """Parse a distribution CSV into curve blocks.

    A new block starts whenever rank_fraction fails to increase, which is
    how stacked curves restart.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DIST_HEADER:
            raise SchemaError(
                f"{path}: expected header {','.join(DIST_HEADER)}, "
                f"got {','.join(header) if header else 'nothing'}"
            )
        blocks: list[list[tuple[float, float]]] = []
        prev = None
        for i, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise SchemaError(f"{path}: row {i}: expected 2 columns, got {len(row)}")
            frac = _float(row[0], path, i, "rank_fraction")
            load = _float(row[1], path, i, "normalized_load")
            if not 0 < frac <= 1:
                raise SchemaError(f"{path}: row {i}: rank_fraction {frac} outside (0, 1]")
            if prev is None or frac <= prev:
                blocks.append([])
            blocks[-1].append((frac, load))
            prev = frac
    return blocks


def read_results(path) -> list[dict]:
    """Parse a results CSV into row dicts with numeric fields converted."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise SchemaError(
                f"{path}: expected header {','.join(RESULTS_HEADER)}, "
                f"got {','.join(header) if header else 'nothing'}"
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(RESULTS_HEADER):
                raise SchemaError(
                    f"{path}: row {i}: expected {len(RESULTS_HEADER)} columns, got {len(row)}"
                )
            rec = dict(zip(RESULTS_HEADER, row))
            for column in ("ratio", "epsilon", "mean_moves", "std_moves",
                           "mean_visits", "max_norm_load", "f_bound"):
                rec[column] = _float(rec[column], path, i, column)
            rows.append(rec)
    return rows


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig = Figure(figsize=FIGSIZE)
    ax = fig.subplots()
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _distribution_figure(path, title: str) -> Figure:
    blocks = read_distribution(path)
    fig, ax = _new_axes(title, "rank fraction (bins by descending load)", "normalized load")
    for idx, block in enumerate(blocks, start=1):
        xs = [frac for frac, _ in block]
        ys = [load for _, load in block]
        ax.plot(xs, ys, drawstyle="steps-post", label=f"curve {idx}")
    if len(blocks) > 1:
        ax.legend()
    ax.set_xlim(0, 1)
    return fig


def _series(rows, ops, normalize_by_ratio: bool):
    """Aggregate rows per (op type, epsilon): mean of means, mean of stds."""
    by_key: dict[tuple[str, float], list[dict]] = {}
    for rec in rows:
        if rec["op_type"] in ops:
            by_key.setdefault((rec["op_type"], rec["epsilon"]), []).append(rec)
    series: dict[str, list[tuple[float, float, float]]] = {op: [] for op in ops}
    for (op, eps), group in sorted(by_key.items(), key=lambda kv: kv[0][1]):
        scale = [1 / rec["ratio"] for rec in group] if normalize_by_ratio else [1.0] * len(group)
        mean = sum(rec["mean_moves"] * s for rec, s in zip(group, scale)) / len(group)
        err = sum(rec["std_moves"] * s for rec, s in zip(group, scale)) / len(group)
        series[op].append((eps, mean, err))
    return series


def _bound_curve(rows, ops, offset: float):
    points: dict[float, float] = {}
    for rec in rows:
        if rec["op_type"] in ops:
            points.setdefault(rec["epsilon"], rec["f_bound"] + offset)
    return sorted(points.items())


def _moves_figure(path, ops, *, title, ylabel, normalize_by_ratio, bound_offset) -> Figure:
    rows = read_results(path)
    fig, ax = _new_axes(title, "epsilon", ylabel)
    series = _series(rows, ops, normalize_by_ratio)
    for op in ops:
        if series[op]:
            xs = [eps for eps, _, _ in series[op]]
            ys = [mean for _, mean, _ in series[op]]
            es = [err for _, _, err in series[op]]
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=op)
    bound = _bound_curve(rows, ops, bound_offset)
    if bound:
        ax.plot(
            [eps for eps, _ in bound],
            [b for _, b in bound],
            "k--",
            label="bound",
        )
        ax.legend()
    return fig


def build_figure(kind: str, csv_path) -> Figure:
    """Build (without saving) the figure of the given kind from one CSV."""
    if kind == "load_dist":
        return _distribution_figure(csv_path, "Normalized load distribution")
    if kind == "load_dist_baseline":
        return _distribution_figure(
            csv_path, "Normalized load distribution, plain hashing"
        )
    if kind == "ball_moves":
        return _moves_figure(
            csv_path,
            _BALL_OPS,
            title="Balls moved per ball operation",
            ylabel="mean balls moved",
            normalize_by_ratio=False,
            bound_offset=0.0,
        )
    if kind == "bin_moves":
        return _moves_figure(
            csv_path,
            _BIN_OPS,
            title="Balls moved per bin operation, normalized by m/n",
            ylabel="mean balls moved / (m/n)",
            normalize_by_ratio=True,
            bound_offset=1.0,
        )
    raise ValueError(f"unknown figure kind {kind!r}; choose from {', '.join(KINDS)}")


def render(kind: str, csv_path, out_path) -> None:
    """Render one figure kind from one CSV to a PNG file."""
    fig = build_figure(kind, csv_path)
    fig.savefig(out_path, format="png", dpi=DPI)

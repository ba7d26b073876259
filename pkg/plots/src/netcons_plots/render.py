"""Render figures from netcons sweep and degree-trace CSV files.

Three figure kinds: runtime-vs-n (one sweep, mean parallel time per n with
an optional fitted reference curve), runtime-by-kschedule (several sweeps
overlaid), and degree-trace (tracked-degree counts over one run).  Output
is deterministic: the same inputs produce byte-identical SVG files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_KINDS = ("runtime-vs-n", "runtime-by-kschedule", "degree-trace")

RUN_HEADER = ["protocol", "k", "n", "seed", "steps", "parallel_time", "stabilized", "wall_ms"]
AGGREGATE_HEADER = ["n", "k", "reps", "mean_parallel_time", "std_parallel_time"]
TRACE_HEADER = ["step", "count_d0", "count_d1", "count_dhalf", "count_dkm1", "count_dk", "free_count"]


class SchemaError(ValueError):
    """Input CSV does not match the schema the figure kind consumes."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: list[str]
    out: str
    overlay: Optional[str] = None  # growth-fit JSON for the reference curve

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")
        if self.kind != "runtime-by-kschedule" and len(self.inputs) != 1:
            raise SchemaError(f"{self.kind} takes exactly one input CSV")


def _read_csv(path: str) -> tuple[list[str], list[str], list[dict]]:
    comments: list[str] = []
    data_lines: list[str] = []
    with open(path, newline="") as handle:
        for line in handle:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                data_lines.append(line)
    header: list[str] = []
    rows: list[dict] = []
    for record in csv.reader(data_lines):
        if not header:
            header = record
        else:
            rows.append(dict(zip(header, record)))
    return comments, header, rows


def _mean_times_by_n(path: str) -> tuple[list[int], list[float], str]:
    """Mean parallel time per n from a records or aggregate CSV."""
    comments, header, rows = _read_csv(path)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    label = path
    for line in comments:
        if "k_schedule=" in line:
            label = line.split("k_schedule=")[1].split()[0]
    if header == RUN_HEADER:
        by_n: dict[int, list[float]] = {}
        for row in rows:
            by_n.setdefault(int(row["n"]), []).append(float(row["parallel_time"]))
        ns = sorted(by_n)
        return ns, [sum(by_n[n]) / len(by_n[n]) for n in ns], label
    if header == AGGREGATE_HEADER:
        ns = [int(row["n"]) for row in rows]
        return ns, [float(row["mean_parallel_time"]) for row in rows], label
    raise SchemaError(f"{path}: header {header} is not a sweep or aggregate schema")


def _read_trace(path: str) -> tuple[list[dict], dict[str, str]]:
    comments, header, rows = _read_csv(path)
    if header != TRACE_HEADER:
        raise SchemaError(f"{path}: header {header} is not a degree-trace schema")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    meta = {}
    for line in comments:
        for part in line.lstrip("# ").split():
            if "=" in part:
                key, value = part.split("=", 1)
                meta[key] = value
    return rows, meta


def _load_overlay(path: str) -> tuple[float, float]:
    with open(path) as handle:
        report = json.load(handle)
    fit = report["polylog"]
    return float(fit["a"]), float(fit["b"])


def _new_axes():
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=100)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _render_runtime_vs_n(spec: FigureSpec):
    ns, means, label = _mean_times_by_n(spec.inputs[0])
    fig, ax = _new_axes()
    ax.plot(ns, means, "o-", markersize=4, label=f"measured ({label})")
    if spec.overlay:
        a, b = _load_overlay(spec.overlay)
        xs = [ns[0] + i * (ns[-1] - ns[0]) / 199 for i in range(200)]
        ax.plot(
            xs,
            [a * math.log2(x) ** b for x in xs],
            "--",
            label=f"{a:.3g} * (log2 n)^{b:.3g}",
        )
    ax.set_xlabel("population size n")
    ax.set_ylabel("mean parallel time")
    ax.legend()
    return fig


def _render_runtime_by_kschedule(spec: FigureSpec):
    fig, ax = _new_axes()
    for path in spec.inputs:
        ns, means, label = _mean_times_by_n(path)
        ax.plot(ns, means, "o-", markersize=4, label=label)
    ax.set_xlabel("population size n")
    ax.set_ylabel("mean parallel time")
    ax.set_yscale("log")
    ax.legend(title="k schedule")
    return fig


def _render_degree_trace(spec: FigureSpec):
    rows, meta = _read_trace(spec.inputs[0])
    k = meta.get("k", "?")
    steps = [int(row["step"]) for row in rows]
    series = [
        ("count_d0", "degree 0"),
        ("count_d1", "degree 1"),
        ("count_dhalf", f"degree {int(k) // 2 if k.isdigit() else 'k/2'}"),
        ("count_dkm1", f"degree {int(k) - 1 if k.isdigit() else 'k-1'}"),
        ("count_dk", f"degree {k}"),
        ("free_count", "unattached"),
    ]
    fig, ax = _new_axes()
    for column, label in series:
        ax.plot(steps, [int(row[column]) for row in rows], label=label)
    ax.set_xlabel("interaction step")
    ax.set_ylabel("node count")
    ax.legend(title=f"n={meta.get('n', '?')}, k={k}")
    return fig


def render(spec: FigureSpec) -> None:
    """Render the figure and write it; inputs are validated before the
    output file is created."""
    builder = {
        "runtime-vs-n": _render_runtime_vs_n,
        "runtime-by-kschedule": _render_runtime_by_kschedule,
        "degree-trace": _render_degree_trace,
    }[spec.kind]
    plt.rcParams["svg.hashsalt"] = "netcons-plots"
    fig = builder(spec)
    try:
        fig.savefig(spec.out, metadata={"Date": None} if spec.out.endswith(".svg") else None)
    finally:
        plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="netcons-render",
        description="Render figures from netcons CSV output.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS, help="figure kind")
    parser.add_argument(
        "--in", dest="inputs", action="append", required=True,
        help="input CSV (repeat for runtime-by-kschedule)",
    )
    parser.add_argument("--out", required=True, help="output image path (.svg for byte-stable output)")
    parser.add_argument("--overlay", default=None,
                        help="growth-fit JSON whose polylog fit is drawn as a reference curve")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(kind=args.kind, inputs=args.inputs, out=args.out, overlay=args.overlay))
    except (SchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

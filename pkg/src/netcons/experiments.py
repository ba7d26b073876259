"""Running-time sweeps, degree traces, and growth-class diagnostics."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .protocols import CROSS_EDGES, TWO_SLOT, protocol_from_name
from .rng import derive_seed
from .runner import (
    RUN_CSV_HEADER,
    RunRecord,
    floor_log2,
    floor_loglog2,
    record_to_csv_row,
    run_full,
    run_to_stabilization,
)

SCHEDULE_KINDS = ("const", "loglog", "log", "sqrt")


@dataclass(frozen=True)
class KSchedule:
    """Degree-bound schedule: a constant or a slow-growing function of n."""

    kind: str
    c: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown k schedule {self.kind!r}")
        if self.kind == "const" and (self.c is None or self.c < 2):
            raise ValueError("const schedule needs an integer constant >= 2")
        if self.kind != "const" and self.c is not None:
            raise ValueError(f"{self.kind} schedule takes no constant")

    @classmethod
    def parse(cls, text: str) -> "KSchedule":
        if text.startswith("const:"):
            return cls("const", int(text.split(":", 1)[1]))
        if text.isdigit():
            return cls("const", int(text))
        return cls(text)

    def __str__(self):
        return f"const:{self.c}" if self.kind == "const" else self.kind


def k_schedule_value(schedule: KSchedule, n: int) -> int:
    """Evaluate a k schedule at population size n.

    Growing schedules use base-2 logs with floors and are clamped to at
    least 3 (the cross-edges validity bound) and at most n-1 (a degree
    cannot exceed n-1 on a complete graph).
    """
    if n < 4:
        raise ValueError("k schedules are defined for n >= 4")
    if schedule.kind == "const":
        value = schedule.c
    elif schedule.kind == "loglog":
        value = max(3, floor_loglog2(n))
    elif schedule.kind == "log":
        value = max(3, floor_log2(n))
    else:
        value = max(3, math.isqrt(n))
    return min(value, n - 1)


def default_n_grid(n_max: int = 1204) -> list[int]:
    """The running-time grid n = 10 + 6t while n <= n_max."""
    return list(range(10, n_max + 1, 6))


@dataclass(frozen=True)
class SweepSpec:
    protocol: str
    n_grid: list[int]
    k_schedule: KSchedule | None = None
    reps: int = 10
    base_seed: int = 0
    max_steps: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.n_grid or any(
            b <= a for a, b in zip(self.n_grid, self.n_grid[1:])
        ):
            raise ValueError("n grid must be non-empty and strictly increasing")
        if self.protocol != TWO_SLOT and self.k_schedule is None:
            raise ValueError(f"{self.protocol} sweeps need a k schedule")
        if (
            self.protocol == CROSS_EDGES
            and self.k_schedule is not None
            and self.k_schedule.kind == "const"
            and self.k_schedule.c < 3
        ):
            raise ValueError("cross-edges needs a constant k of at least 3")

    def k_for(self, n: int) -> int:
        if self.protocol == TWO_SLOT:
            return 2
        return k_schedule_value(self.k_schedule, n)

    def spec_line(self) -> str:
        schedule = str(self.k_schedule) if self.k_schedule else "none"
        grid = ",".join(str(n) for n in self.n_grid)
        steps = "auto" if self.max_steps is None else str(self.max_steps)
        return (
            f"protocol={self.protocol} k_schedule={schedule} reps={self.reps} "
            f"base_seed={self.base_seed} max_steps={steps} n_grid={grid}"
        )


@dataclass(frozen=True)
class AggregateRow:
    n: int
    k: int
    reps: int
    mean_parallel_time: float
    std_parallel_time: float


@dataclass(frozen=True)
class SweepResult:
    records: list[RunRecord]
    aggregates: list[AggregateRow]


def _sweep_cell(args: tuple[str, int, int, int, int | None]) -> RunRecord:
    name, k, n, seed, max_steps = args
    try:
        protocol = protocol_from_name(name, k)
        return run_to_stabilization(protocol, n, seed, max_steps)
    except Exception as exc:  # a failed cell is recorded, not fatal
        print(f"sweep cell failed (protocol={name} k={k} n={n}): {exc}", file=sys.stderr)
        return RunRecord(name, k, n, seed, 0, 0.0, False, 0.0)


def sweep_running_time(spec: SweepSpec) -> SweepResult:
    """Run every (n, rep) cell of the sweep and aggregate per n.

    Cell seeds derive from (base_seed, n, rep), so results are independent
    of execution order and job count.
    """
    cells = [
        (spec.protocol, spec.k_for(n), n, derive_seed(spec.base_seed, n, rep), spec.max_steps)
        for n in spec.n_grid
        for rep in range(spec.reps)
    ]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            records = list(pool.map(_sweep_cell, cells, chunksize=1))
    else:
        records = [_sweep_cell(cell) for cell in cells]

    aggregates = []
    for i, n in enumerate(spec.n_grid):
        chunk = records[i * spec.reps : (i + 1) * spec.reps]
        times = np.array([r.parallel_time for r in chunk])
        std = float(np.std(times, ddof=1)) if len(times) > 1 else 0.0
        aggregates.append(
            AggregateRow(n, spec.k_for(n), spec.reps, float(np.mean(times)), std)
        )
    return SweepResult(records, aggregates)


def write_sweep_csv(
    spec: SweepSpec, result: SweepResult, out: IO[str], include_wall: bool = True
) -> None:
    out.write(f"# spec: {spec.spec_line()}\n")
    out.write(
        "# k schedule bases: log=floor(log2 n), loglog=floor(log2 log2 n), "
        "sqrt=floor(sqrt n); growing schedules clamped to [3, n-1]\n"
    )
    out.write(RUN_CSV_HEADER + "\n")
    for record in result.records:
        out.write(record_to_csv_row(record, include_wall) + "\n")


AGGREGATE_CSV_HEADER = "n,k,reps,mean_parallel_time,std_parallel_time"


def write_aggregate_csv(result: SweepResult, out: IO[str]) -> None:
    out.write(AGGREGATE_CSV_HEADER + "\n")
    for row in result.aggregates:
        out.write(
            f"{row.n},{row.k},{row.reps},{row.mean_parallel_time!r},"
            f"{row.std_parallel_time!r}\n"
        )


@dataclass(frozen=True)
class DegreeTrace:
    """Per-step counts of nodes at the tracked degrees of a cross-edges run."""

    n: int
    k: int
    seed: int
    record_every: int
    tracked: tuple[int, int, int, int, int]
    rows: list[tuple[int, int, int, int, int, int, int]] = field(default_factory=list)
    # row = (step, count at each tracked degree..., free count)


TRACE_CSV_HEADER = "step,count_d0,count_d1,count_dhalf,count_dkm1,count_dk,free_count"


def degree_trace(n: int, k: int, seed: int, record_every: int | None = None) -> DegreeTrace:
    """Run cross-edges(k) recording tracked-degree counts until stabilization.

    Tracked degrees are 0, 1, floor(k/2), k-1 and k; a row is recorded every
    `record_every` effective steps (default: every one for n <= 500, else
    every n), plus the initial and final states.
    """
    if not n > k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    if k < 3:
        raise ValueError("cross-edges traces need k >= 3")
    if record_every is None:
        record_every = 1 if n <= 500 else n
    protocol = protocol_from_name(CROSS_EDGES, k)
    tracked = (0, 1, k // 2, k - 1, k)
    trace = DegreeTrace(n=n, k=k, seed=seed, record_every=record_every, tracked=tracked)

    def snapshot_row(config, step_index):
        counts = [0, 0, 0, 0, 0]
        for d in config.degrees:
            for slot, target in enumerate(tracked):
                if d == target:
                    counts[slot] += 1
        return (step_index, *counts, config.free_count())

    effective_seen = 0

    def observer(config, step_index, effective):
        nonlocal effective_seen
        if not effective:
            return
        effective_seen += 1
        if effective_seen % record_every == 0:
            trace.rows.append(snapshot_row(config, step_index))

    record, config = run_full(protocol, n, seed, observer=observer)
    initial_counts = [n if target == 0 else 0 for target in tracked]
    trace.rows.insert(0, (0, *initial_counts, n - 1))
    if trace.rows[-1][0] != record.steps:
        trace.rows.append(snapshot_row(config, record.steps))
    return trace


def write_trace_csv(trace: DegreeTrace, out: IO[str]) -> None:
    out.write(
        f"# trace: n={trace.n} k={trace.k} seed={trace.seed} "
        f"record_every={trace.record_every} tracked_degrees="
        + ",".join(str(d) for d in trace.tracked)
        + "\n"
    )
    out.write(TRACE_CSV_HEADER + "\n")
    for row in trace.rows:
        out.write(",".join(str(x) for x in row) + "\n")


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    rss: float


@dataclass(frozen=True)
class GrowthReport:
    polylog: FitResult
    polynomial: FitResult
    better: str  # "polylog" or "polynomial"


def classify_growth(points: Iterable[tuple[int, float]]) -> GrowthReport:
    """Fit t ~ a*(log2 n)^b and t ~ a*n^b and pick the class with the lower
    log-space residual sum (ties go to polylog)."""
    pts = sorted(points)
    if len(pts) < 10:
        raise ValueError("growth classification needs at least 10 points")
    ns = np.array([p[0] for p in pts], dtype=float)
    ts = np.array([p[1] for p in pts], dtype=float)
    if ns.max() < 4 * ns.min():
        raise ValueError("n values must span at least two octaves")
    if np.any(ts <= 0):
        raise ValueError("times must be positive")

    log_t = np.log(ts)

    def fit(x: np.ndarray) -> FitResult:
        slope, intercept = np.polyfit(np.log(x), log_t, 1)
        resid = log_t - (slope * np.log(x) + intercept)
        return FitResult(a=float(np.exp(intercept)), b=float(slope), rss=float(np.sum(resid**2)))

    polylog = fit(np.log2(ns))
    polynomial = fit(ns)
    better = "polylog" if polylog.rss <= polynomial.rss else "polynomial"
    return GrowthReport(polylog=polylog, polynomial=polynomial, better=better)


def growth_report_dict(report: GrowthReport) -> dict:
    return {
        "polylog": {"a": report.polylog.a, "b": report.polylog.b, "rss": report.polylog.rss},
        "polynomial": {
            "a": report.polynomial.a,
            "b": report.polynomial.b,
            "rss": report.polynomial.rss,
        },
        "better": report.better,
    }

import io
import math

import numpy as np
import pytest

from netcons.experiments import (
    KSchedule,
    SweepSpec,
    classify_growth,
    default_n_grid,
    degree_trace,
    k_schedule_value,
    sweep_running_time,
    write_aggregate_csv,
    write_sweep_csv,
    write_trace_csv,
)
from netcons.runner import run_full


def test_k_schedule_values():
    assert k_schedule_value(KSchedule("sqrt"), 100) == 10
    assert k_schedule_value(KSchedule("loglog"), 256) == 3
    assert k_schedule_value(KSchedule("const", 3), 100) == 3
    assert k_schedule_value(KSchedule("log"), 1024) == 10
    assert k_schedule_value(KSchedule("loglog"), 4096) == 3
    # clamps: lower bound 3, upper bound n-1
    assert k_schedule_value(KSchedule("sqrt"), 4) == 3
    assert k_schedule_value(KSchedule("const", 10), 4) == 3
    with pytest.raises(ValueError):
        k_schedule_value(KSchedule("sqrt"), 3)


def test_k_schedule_parse_and_format():
    assert KSchedule.parse("const:5") == KSchedule("const", 5)
    assert KSchedule.parse("7") == KSchedule("const", 7)
    assert KSchedule.parse("sqrt") == KSchedule("sqrt")
    assert str(KSchedule("const", 3)) == "const:3"
    assert str(KSchedule("loglog")) == "loglog"
    with pytest.raises(ValueError):
        KSchedule("bogus")
    with pytest.raises(ValueError):
        KSchedule("const")
    with pytest.raises(ValueError):
        KSchedule("sqrt", 4)


def test_default_grid_is_10_plus_6t():
    grid = default_n_grid()
    assert grid[0] == 10 and grid[1] == 16
    assert len(grid) == 200 and grid[-1] == 1204
    assert default_n_grid(100) == list(range(10, 101, 6))


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("two-slot", [10, 10])
    with pytest.raises(ValueError):
        SweepSpec("two-slot", [])
    with pytest.raises(ValueError):
        SweepSpec("two-slot", [10], reps=0)
    with pytest.raises(ValueError):
        SweepSpec("cross-edges", [10], KSchedule("const", 2))
    with pytest.raises(ValueError):
        SweepSpec("k-slot", [10])  # needs a schedule
    spec = SweepSpec("two-slot", [10, 16])
    assert spec.k_for(10) == 2


def test_sweep_runs_grid_and_aggregates():
    spec = SweepSpec("two-slot", [10, 16, 22], reps=3, base_seed=5)
    result = sweep_running_time(spec)
    assert len(result.records) == 9
    assert [r.n for r in result.records] == [10, 10, 10, 16, 16, 16, 22, 22, 22]
    assert all(r.stabilized for r in result.records)
    for row, n in zip(result.aggregates, [10, 16, 22]):
        chunk = [r.parallel_time for r in result.records if r.n == n]
        assert row.n == n and row.reps == 3
        assert row.mean_parallel_time == pytest.approx(float(np.mean(chunk)))
        assert row.std_parallel_time == pytest.approx(float(np.std(chunk, ddof=1)))


def test_sweep_reproducible_and_jobs_invariant():
    spec1 = SweepSpec("cross-edges", [12, 20], KSchedule("const", 3), reps=2, base_seed=9)
    spec2 = SweepSpec("cross-edges", [12, 20], KSchedule("const", 3), reps=2, base_seed=9, jobs=2)
    a = sweep_running_time(spec1)
    b = sweep_running_time(spec2)
    key = lambda r: (r.protocol, r.k, r.n, r.seed, r.steps, r.stabilized)
    assert [key(r) for r in a.records] == [key(r) for r in b.records]

    out1, out2 = io.StringIO(), io.StringIO()
    write_sweep_csv(spec1, a, out1, include_wall=False)
    write_sweep_csv(spec2, b, out2, include_wall=False)
    assert out1.getvalue() == out2.getvalue()

    agg1, agg2 = io.StringIO(), io.StringIO()
    write_aggregate_csv(a, agg1)
    write_aggregate_csv(b, agg2)
    assert agg1.getvalue() == agg2.getvalue()


def test_sweep_csv_format():
    spec = SweepSpec("two-slot", [10], reps=2, base_seed=1)
    result = sweep_running_time(spec)
    out = io.StringIO()
    write_sweep_csv(spec, result, out)
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("# spec: protocol=two-slot")
    assert lines[2] == "protocol,k,n,seed,steps,parallel_time,stabilized,wall_ms"
    assert len(lines) == 3 + 2
    fields = lines[3].split(",")
    assert fields[0] == "two-slot" and fields[1] == "2" and fields[2] == "10"
    assert fields[6] == "true"


def test_degree_trace_row_cadence():
    trace = degree_trace(20, 3, seed=3, record_every=1)
    effective = []

    def observer(config, step_index, eff):
        if eff:
            effective.append(step_index)

    from netcons.protocols import cross_edges_tree

    run_full(cross_edges_tree(3), 20, 3, observer=observer)
    assert len(trace.rows) == len(effective) + 1
    assert trace.rows[0][0] == 0
    assert trace.rows[-1][0] == effective[-1]


def test_degree_trace_counts():
    n, k = 60, 3
    trace = degree_trace(n, k, seed=11)
    assert trace.tracked == (0, 1, 1, 2, 3)  # floor(k/2) duplicates degree 1
    d0 = [row[1] for row in trace.rows]
    assert d0[0] == n
    assert d0[-1] == 0  # stabilization leaves no unattached node
    assert all(b <= a for a, b in zip(d0, d0[1:]))
    for row in trace.rows:
        assert all(0 <= c <= n for c in row[1:])
        # degree-0 nodes are the free nodes, plus the leader before it acts
        assert row[6] <= row[1] <= row[6] + 1
    free = [row[6] for row in trace.rows]
    assert free[0] == n - 1 and free[-1] == 0


def test_degree_trace_large_n_default_cadence():
    trace = degree_trace(600, 3, seed=2)
    assert trace.record_every == 600
    assert trace.rows[-1][6] == 0


def test_degree_trace_half_duration_fraction_report():
    # near-sqrt degree bound: report the fraction of nodes at degree k-1
    # halfway through the run (inspection aid, bounded sanity assertion only)
    n, k = 200, 14
    trace = degree_trace(n, k, seed=21)
    half_step = trace.rows[-1][0] // 2
    row = min(trace.rows, key=lambda r: abs(r[0] - half_step))
    fraction = row[4] / n
    print(f"degree {k - 1} fraction at half duration: {fraction:.3f}")
    assert 0.0 <= fraction <= 1.0


def test_degree_trace_validation():
    with pytest.raises(ValueError):
        degree_trace(10, 10, 1)
    with pytest.raises(ValueError):
        degree_trace(10, 2, 1)


def test_trace_csv_format():
    trace = degree_trace(20, 4, seed=5, record_every=2)
    out = io.StringIO()
    write_trace_csv(trace, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "# trace: n=20 k=4 seed=5 record_every=2 tracked_degrees=0,1,2,3,4"
    assert lines[1] == "step,count_d0,count_d1,count_dhalf,count_dkm1,count_dk,free_count"
    assert len(lines) == 2 + len(trace.rows)


def test_classify_growth_synthetic_polylog():
    points = [(n, math.log2(n) ** 2) for n in [2**e for e in range(4, 14)]]
    report = classify_growth(points)
    assert report.better == "polylog"
    assert abs(report.polylog.b - 2.0) <= 0.1


def test_classify_growth_synthetic_linear():
    points = [(n, n / 10) for n in [2**e for e in range(4, 14)]]
    report = classify_growth(points)
    assert report.better == "polynomial"
    assert abs(report.polynomial.b - 1.0) <= 0.05


def test_classify_growth_constant_is_polylog_class():
    points = [(n, 7.0) for n in [2**e for e in range(4, 14)]]
    report = classify_growth(points)
    assert report.better == "polylog"
    assert abs(report.polylog.b) <= 0.05


def test_classify_growth_input_validation():
    with pytest.raises(ValueError):
        classify_growth([(10, 1.0)] * 9)
    with pytest.raises(ValueError):
        classify_growth([(n, 1.0) for n in range(10, 20)])  # span < 2 octaves
    with pytest.raises(ValueError):
        classify_growth([(2**e, 0.0) for e in range(4, 14)])
    with pytest.raises(ValueError):
        classify_growth([(16, 1.0)] * 10)


def test_const3_means_sit_under_cubed_log_envelope():
    # at the default-grid scale the measured means stay below (log2 n)^3;
    # growth-class analysis at larger n lives in the acceptance suite
    from netcons.protocols import cross_edges_tree
    from netcons.rng import derive_seed
    from netcons.runner import run_to_stabilization

    for n in (304, 604, 904):
        times = [
            run_to_stabilization(cross_edges_tree(3), n, derive_seed(55, n, r)).parallel_time
            for r in range(4)
        ]
        assert np.mean(times) <= math.log2(n) ** 3

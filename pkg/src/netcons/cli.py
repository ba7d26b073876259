"""Command-line entry point: run, sweep, degrees, oracle, validate."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import secrets
import sys
from contextlib import contextmanager

from . import experiments, oracle, validators
from .core import parse_snapshot, write_snapshot
from .protocols import CROSS_EDGES, PROTOCOL_NAMES, protocol_from_name
from .runner import run_full


@contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as handle:
            yield handle


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    seed = secrets.randbits(63)
    print(f"generated seed: {seed}", file=sys.stderr)
    return seed


def _emit_json(payload: dict, path: str | None) -> None:
    with _open_out(path) as out:
        out.write(json.dumps(payload, indent=2) + "\n")


def _cmd_run(args) -> int:
    protocol = protocol_from_name(args.protocol, args.k)
    seed = _resolve_seed(args.seed)
    record, config = run_full(protocol, args.n, seed, args.max_steps)
    _emit_json(dataclasses.asdict(record), args.out)
    if args.snapshot_out:
        with open(args.snapshot_out, "w") as handle:
            handle.write(write_snapshot(config, protocol))
    return 0 if record.stabilized else 1


def _read_sweep_config(path: str) -> dict:
    values: dict[str, str] = {}
    with open(path) as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line (want key=value): {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _build_sweep_spec(args) -> experiments.SweepSpec:
    file_values = _read_sweep_config(args.config) if args.config else {}

    def pick(flag_value, key, cast, fallback):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return cast(file_values[key])
        return fallback

    protocol = pick(args.protocol, "protocol", str, None)
    if protocol is None:
        raise ValueError("sweep needs --protocol (flag or config file)")
    schedule_text = pick(args.k_schedule, "k_schedule", str, None)
    if schedule_text is None and "k" in file_values and args.k_schedule is None:
        schedule_text = f"const:{int(file_values['k'])}"
    schedule = experiments.KSchedule.parse(schedule_text) if schedule_text else None

    grid_text = pick(args.n_grid, "n_grid", str, None)
    if grid_text is not None:
        grid = [int(part) for part in grid_text.split(",") if part]
    else:
        n_max = pick(args.n_max, "n_max", int, 1204)
        grid = experiments.default_n_grid(n_max)

    return experiments.SweepSpec(
        protocol=protocol,
        n_grid=grid,
        k_schedule=schedule,
        reps=pick(args.reps, "reps", int, 10),
        base_seed=_resolve_seed(pick(args.base_seed, "base_seed", int, None)),
        max_steps=pick(args.max_steps, "max_steps", int, None),
        jobs=pick(args.jobs, "jobs", int, os.cpu_count() or 1),
    )


def _cmd_sweep(args) -> int:
    spec = _build_sweep_spec(args)
    result = experiments.sweep_running_time(spec)
    with _open_out(args.out) as out:
        experiments.write_sweep_csv(spec, result, out, include_wall=not args.no_wall)
    if args.aggregate_out:
        with _open_out(args.aggregate_out) as out:
            experiments.write_aggregate_csv(result, out)
    if args.growth_out:
        points = [(row.n, row.mean_parallel_time) for row in result.aggregates]
        report = experiments.classify_growth(points)
        _emit_json(experiments.growth_report_dict(report), args.growth_out)
    return 0 if all(record.stabilized for record in result.records) else 1


def _cmd_degrees(args) -> int:
    seed = _resolve_seed(args.seed)
    trace = experiments.degree_trace(args.n, args.k, seed, args.record_every)
    with _open_out(args.out) as out:
        experiments.write_trace_csv(trace, out)
    return 0


def _cmd_oracle(args) -> int:
    seed = _resolve_seed(args.seed)
    result = oracle.simulate_oracle(args.n, args.reps, seed)
    _emit_json(dataclasses.asdict(result), args.out)
    return 0


def _cmd_validate(args) -> int:
    try:
        with open(args.snapshot) as handle:
            config, name, k = parse_snapshot(handle.read())
        protocol = protocol_from_name(name, k)
    except (OSError, ValueError) as exc:
        print(f"cannot read snapshot: {exc}", file=sys.stderr)
        return 2
    stable = validators.fast_stable(config, protocol)
    payload: dict = {
        "protocol": name,
        "k": k,
        "n": config.n,
        "stable": stable,
        "free_count": config.free_count(),
    }
    code = 0
    if not stable:
        print("configuration is not stabilized", file=sys.stderr)
        code = 1
    elif name == CROSS_EDGES:
        try:
            report = validators.stability_invariants(config, k)
            payload.update(dataclasses.asdict(report))
        except validators.InvariantViolation as exc:
            print(f"stabilization invariant violated: {exc}", file=sys.stderr)
            code = 1
    _emit_json(payload, args.out)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcons",
        description="Simulate finite-state agents that assemble networks "
        "through uniformly random pairwise interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p_run = sub.add_parser("run", help="run one execution to stabilization", formatter_class=fmt)
    p_run.add_argument("--protocol", required=True, choices=PROTOCOL_NAMES)
    p_run.add_argument("--k", type=int, default=None, help="protocol parameter k (two-slot fixes k=2)")
    p_run.add_argument("--n", type=int, required=True, help="population size")
    p_run.add_argument("--seed", type=int, default=None, help="RNG seed (generated and echoed if omitted)")
    p_run.add_argument("--max-steps", type=int, default=None, help="safety cutoff (default: regime-based)")
    p_run.add_argument("--out", default=None, help="output path for the run record JSON (default stdout)")
    p_run.add_argument("--snapshot-out", default=None, help="also write the final configuration snapshot")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="running-time sweep over an n grid", formatter_class=fmt)
    p_sweep.add_argument("--protocol", choices=PROTOCOL_NAMES, default=None)
    p_sweep.add_argument("--k-schedule", default=None,
                         help="k as a function of n: const:<c>, loglog, log, or sqrt")
    p_sweep.add_argument("--n-grid", default=None, help="comma-separated n values (overrides --n-max)")
    p_sweep.add_argument("--n-max", type=int, default=None,
                         help="cap for the default grid n = 10 + 6t (default 1204)")
    p_sweep.add_argument("--reps", type=int, default=None, help="repetitions per n (default 10)")
    p_sweep.add_argument("--base-seed", type=int, default=None, help="seed for per-cell derivation")
    p_sweep.add_argument("--max-steps", type=int, default=None, help="per-run cutoff override")
    p_sweep.add_argument("--jobs", type=int, default=None, help="concurrent cells (default: CPU count)")
    p_sweep.add_argument("--config", default=None, help="key=value file mirroring these flags")
    p_sweep.add_argument("--out", default=None, help="records CSV path (default stdout)")
    p_sweep.add_argument("--aggregate-out", default=None, help="per-n aggregate CSV path")
    p_sweep.add_argument("--growth-out", default=None, help="growth-class fit JSON path")
    p_sweep.add_argument("--no-wall", action="store_true",
                         help="omit wall-clock values for byte-reproducible output")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_deg = sub.add_parser("degrees", help="degree trace of one cross-edges run", formatter_class=fmt)
    p_deg.add_argument("--n", type=int, required=True, help="population size")
    p_deg.add_argument("--k", type=int, required=True, help="degree bound (>= 3)")
    p_deg.add_argument("--seed", type=int, default=None, help="RNG seed (generated and echoed if omitted)")
    p_deg.add_argument("--record-every", type=int, default=None,
                       help="effective steps between rows (default: 1 if n<=500 else n)")
    p_deg.add_argument("--out", default=None, help="trace CSV path (default stdout)")
    p_deg.set_defaults(func=_cmd_degrees)

    p_oracle = sub.add_parser("oracle", help="analytic vs simulated expected steps", formatter_class=fmt)
    p_oracle.add_argument("--n", type=int, required=True, help="population size")
    p_oracle.add_argument("--reps", type=int, default=1000, help="Monte-Carlo repetitions")
    p_oracle.add_argument("--seed", type=int, default=None, help="RNG seed (generated and echoed if omitted)")
    p_oracle.add_argument("--out", default=None, help="result JSON path (default stdout)")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_val = sub.add_parser("validate", help="stability report for a snapshot file", formatter_class=fmt)
    p_val.add_argument("snapshot", help="configuration snapshot path")
    p_val.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

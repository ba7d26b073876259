"""Uniform-random-scheduler execution loop with step accounting.

Every step draws one of the n(n-1) ordered pairs (unordered pair plus an
orientation coin) from a seeded counter-mode stream, so a (protocol, n,
seed) triple fully determines the run.  Stability is detected with O(1)
incremental bookkeeping: tree protocols are stable exactly when no free
node remains; the cross-edges protocol additionally needs every pair of
low-counter members to be linked, tracked as a running count of unsatisfied
pairs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import FREE, Configuration, is_stable_naive
from .protocols import CROSS_EDGES, PROTOCOL_NAMES, TREE_PROTOCOLS, Protocol, initial_configuration
from .rng import Stream

CHUNK = 4096  # fixed fetch size; counter-mode stream makes chunking invisible


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError("log2 needs a positive integer")
    return n.bit_length() - 1


def floor_loglog2(n: int) -> int:
    if n < 2:
        raise ValueError("log2(log2(n)) needs n >= 2")
    return floor_log2(floor_log2(n))


@dataclass(frozen=True)
class RunRecord:
    protocol: str
    k: int
    n: int
    seed: int
    steps: int
    parallel_time: float
    stabilized: bool
    wall_ms: float


RUN_CSV_HEADER = "protocol,k,n,seed,steps,parallel_time,stabilized,wall_ms"


def record_to_csv_row(record: RunRecord, include_wall: bool = True) -> str:
    wall = f"{record.wall_ms:.3f}" if include_wall else ""
    return (
        f"{record.protocol},{record.k},{record.n},{record.seed},{record.steps},"
        f"{record.parallel_time!r},{'true' if record.stabilized else 'false'},{wall}"
    )


def default_max_steps(protocol: Protocol, n: int) -> int:
    """Safety cutoff an order of magnitude above observed regimes.

    Tree protocols and cross-edges with k at or below the loglog threshold
    get 200*n*(ln n)^3; larger k (the polynomial regime) gets 50*n^2.
    """
    if protocol.name in TREE_PROTOCOLS:
        return math.ceil(200 * n * math.log(n) ** 3)
    if protocol.k <= max(3, floor_loglog2(n)):
        return math.ceil(200 * n * math.log(n) ** 3)
    return 50 * n * n


def decode_pair(idx: int) -> tuple[int, int]:
    """Map a triangular pair index to (u, v) with u < v."""
    v = int((1.0 + math.sqrt(1.0 + 8.0 * idx)) * 0.5)
    while v * (v - 1) // 2 > idx:
        v -= 1
    while v * (v + 1) // 2 <= idx:
        v += 1
    return idx - v * (v - 1) // 2, v


def _decode_pairs(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f = idx.astype(np.float64)
    v = ((1.0 + np.sqrt(1.0 + 8.0 * f)) * 0.5).astype(np.int64)
    idx = idx.astype(np.int64)
    v = np.where(v * (v - 1) // 2 > idx, v - 1, v)
    v = np.where(v * (v + 1) // 2 <= idx, v + 1, v)
    u = idx - v * (v - 1) // 2
    return u, v


def step(config: Configuration, protocol: Protocol, rng: Stream) -> bool:
    """One scheduler step: uniform pair, orientation coin, one encounter."""
    from .core import apply_encounter

    n = config.n
    if n < 2:
        raise ValueError("scheduling needs at least two nodes")
    draw = rng.next_below(n * (n - 1))
    u, v = decode_pair(draw >> 1)
    return apply_encounter(config, protocol, u, v, bool(draw & 1))


def _validate(protocol: Protocol, n: int) -> None:
    if protocol.name not in PROTOCOL_NAMES:
        raise ValueError(f"runner supports only {PROTOCOL_NAMES}, got {protocol.name!r}")
    if n < 2:
        raise ValueError("run needs a population of at least 2")
    if protocol.name == CROSS_EDGES:
        if n <= 3:
            raise ValueError("cross-edges runs need n > 3")
        if protocol.k >= n:
            raise ValueError(f"cross-edges needs k < n, got k={protocol.k}, n={n}")


def run_full(
    protocol: Protocol,
    n: int,
    seed: int,
    max_steps: int | None = None,
    observer=None,
    verify_final: bool = False,
) -> tuple[RunRecord, Configuration]:
    """Run to stabilization (or the cutoff); returns the record and final state.

    ``observer(config, step_index, effective)`` is invoked after every step
    with the live configuration, which it must not mutate.
    """
    _validate(protocol, n)
    if max_steps is None:
        max_steps = default_max_steps(protocol, n)
    started = time.perf_counter()

    config = initial_configuration(n, protocol)
    states = config.states
    degrees = config.degrees
    edges = config.packed_edges()
    flat = protocol.flat_rules()
    base = protocol._key_base
    k = protocol.k
    is_cross = protocol.name == CROSS_EDGES
    stream = Stream(seed)

    free_count = n - 1
    # Cross-edges tracker: members = non-free nodes with counter <= k-2,
    # unsat = inactive pairs among members (0 at stabilization).
    low_cap = 2 * (k - 2) + 2  # highest state value whose counter is <= k-2
    members: set[int] = {0}
    unsat = 0
    adjacency: list[list[int]] = [[] for _ in range(n)] if is_cross else []

    def member_add(x: int) -> None:
        nonlocal unsat
        unsat += len(members) - sum(1 for w in adjacency[x] if w in members)
        members.add(x)

    def member_remove(x: int) -> None:
        nonlocal unsat
        members.discard(x)
        unsat -= len(members) - sum(1 for w in adjacency[x] if w in members)

    def is_stable_now() -> bool:
        if free_count:
            return False
        return not is_cross or unsat == 0

    steps = 0
    stabilized = is_stable_now()
    ordered_pairs = n * (n - 1)
    while not stabilized and steps < max_steps:
        fetch = min(CHUNK, max_steps - steps)
        draws = stream.chunk_below(ordered_pairs, fetch)
        coins = (draws & np.uint64(1)).tolist()
        us, vs = _decode_pairs(draws >> np.uint64(1))
        us = us.tolist()
        vs = vs.tolist()
        for i in range(fetch):
            steps += 1
            u = us[i]
            v = vs[i]
            a = states[u]
            b = states[v]
            ekey = u * n + v
            e = 1 if ekey in edges else 0
            if coins[i]:
                post = flat.get((a * base + b) * 2 + e)
                if post is not None:
                    a2, b2 = post[0], post[1]
                else:
                    post = flat.get((b * base + a) * 2 + e)
                    if post is not None:
                        b2, a2 = post[0], post[1]
            else:
                post = flat.get((b * base + a) * 2 + e)
                if post is not None:
                    b2, a2 = post[0], post[1]
                else:
                    post = flat.get((a * base + b) * 2 + e)
                    if post is not None:
                        a2, b2 = post[0], post[1]
            if post is None:
                if observer is not None:
                    observer(config, steps, False)
                continue

            states[u] = a2
            states[v] = b2
            if a == FREE and a2 != FREE:
                free_count -= 1
            elif a != FREE and a2 == FREE:
                free_count += 1
            if b == FREE and b2 != FREE:
                free_count -= 1
            elif b != FREE and b2 == FREE:
                free_count += 1

            e2 = post[2]
            if is_cross:
                u_was = FREE < a <= low_cap
                v_was = FREE < b <= low_cap
                u_now = FREE < a2 <= low_cap
                v_now = FREE < b2 <= low_cap
                if u_was != u_now or v_was != v_now:
                    if u_was:
                        member_remove(u)
                    if v_was:
                        member_remove(v)
                    if e2 != e:
                        _flip_edge(config, adjacency, u, v, ekey, e2)
                    if u_now:
                        member_add(u)
                    if v_now:
                        member_add(v)
                else:
                    if e2 != e:
                        _flip_edge(config, adjacency, u, v, ekey, e2)
                        if u_was and v_was:
                            unsat += -1 if e2 else 1
            elif e2 != e:
                if e2:
                    edges.add(ekey)
                    degrees[u] += 1
                    degrees[v] += 1
                else:
                    edges.remove(ekey)
                    degrees[u] -= 1
                    degrees[v] -= 1

            if observer is not None:
                observer(config, steps, True)
            if is_stable_now():
                stabilized = True
                break
    stream.rewind(steps)

    if stabilized and verify_final:
        assert is_stable_naive(config, protocol), "fast stability disagrees with the reference test"
    wall_ms = (time.perf_counter() - started) * 1000.0
    record = RunRecord(
        protocol=protocol.name,
        k=protocol.k,
        n=n,
        seed=seed,
        steps=steps,
        parallel_time=steps / n,
        stabilized=stabilized,
        wall_ms=wall_ms,
    )
    return record, config


def _flip_edge(config: Configuration, adjacency: list[list[int]], u: int, v: int, ekey: int, e2: int) -> None:
    edges = config.packed_edges()
    degrees = config.degrees
    if e2:
        edges.add(ekey)
        degrees[u] += 1
        degrees[v] += 1
        adjacency[u].append(v)
        adjacency[v].append(u)
    else:
        edges.remove(ekey)
        degrees[u] -= 1
        degrees[v] -= 1
        adjacency[u].remove(v)
        adjacency[v].remove(u)


def run_to_stabilization(
    protocol: Protocol,
    n: int,
    seed: int,
    max_steps: int | None = None,
) -> RunRecord:
    """Drive one execution to stabilization; stabilized=False only on cutoff."""
    record, _ = run_full(protocol, n, seed, max_steps)
    return record

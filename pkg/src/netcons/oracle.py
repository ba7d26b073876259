"""Analytic running-time oracles for the two-slot tree builder.

The rebalanced attachment process keeps the number of join-ready tree nodes
pinned at floor(size/2)+1 by shifting a leaf between any two one-child
nodes.  Its expected step count has a closed form that also upper-bounds
the plain two-slot run, which these helpers expose for desk-scale checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FREE, apply_encounter, counter_of
from .protocols import initial_configuration, two_slot
from .rng import Stream, geometric
from .runner import decode_pair


def available_nodes(tree_size: int) -> int:
    """Join-ready node count of a rebalanced tree: floor(size/2) + 1."""
    if tree_size < 1:
        raise ValueError("tree size must be at least 1")
    return tree_size // 2 + 1


def _epoch_success_probability(n: int, i: int) -> float:
    # Epoch i: tree holds i nodes, n-i remain unattached; a step succeeds
    # when it pairs a join-ready tree node with an unattached one.
    return 2.0 * available_nodes(i) * (n - i) / (n * (n - 1))


def expected_steps_upper(n: int) -> float:
    """Exact expected interactions of the rebalanced process; an upper bound
    for the plain two-slot run.

    Equals (n(n-1)/2) * sum_{i=1}^{n-1} 1 / ((floor(i/2)+1) * (n-i)),
    accumulated with compensated summation.
    """
    if n < 2:
        raise ValueError("need a population of at least 2")
    total = math.fsum(
        1.0 / ((i // 2 + 1) * (n - i)) for i in range(1, n)
    )
    return n * (n - 1) / 2 * total


def run_restricted_process_many(n: int, reps: int, seed: int) -> np.ndarray:
    """Steps-to-spanning samples of the rebalanced process.

    The rebalancing pins the join-ready count, so each epoch's length is an
    independent geometric draw; the run is simulated one epoch column at a
    time across all repetitions.
    """
    if n < 2:
        raise ValueError("need a population of at least 2")
    if reps < 1:
        raise ValueError("need at least one repetition")
    stream = Stream(seed)
    totals = np.zeros(reps, dtype=np.int64)
    for i in range(1, n):
        totals += geometric(stream, _epoch_success_probability(n, i), reps)
    return totals


def run_restricted_process(n: int, seed: int) -> int:
    """Steps to spanning for one execution of the rebalanced process."""
    return int(run_restricted_process_many(n, 1, seed)[0])


def run_restricted_process_reference(n: int, seed: int, check_invariant: bool = False) -> int:
    """Step-level rebalanced run on a real configuration (cross-validation).

    Simulates the two-slot protocol under the scheduler restriction: after
    every attachment, if two tree nodes each have exactly one child, a leaf
    child moves from one to the other (coin flip when both qualify).
    """
    if n < 2:
        raise ValueError("need a population of at least 2")
    protocol = two_slot()
    config = initial_configuration(n, protocol)
    states = config.states
    stream = Stream(seed)
    children: list[list[int]] = [[] for _ in range(n)]
    free = n - 1
    steps = 0
    ordered_pairs = n * (n - 1)
    while free > 0:
        draw = stream.next_below(ordered_pairs)
        u, v = decode_pair(draw >> 1)
        su, sv = states[u], states[v]
        steps += 1
        if not apply_encounter(config, protocol, u, v, bool(draw & 1)):
            continue
        free -= 1
        child, parent = (u, v) if su == FREE else (v, u)
        children[parent].append(child)

        ones = [
            x for x in range(n) if states[x] != FREE and counter_of(states[x]) == 1
        ]
        if len(ones) > 2:
            raise AssertionError("more than two one-child nodes should be impossible")
        if len(ones) == 2:
            x, y = ones
            cx, cy = children[x][0], children[y][0]
            x_leaf = not children[cx]
            y_leaf = not children[cy]
            if x_leaf and y_leaf:
                donor = x if stream.next_u64() & 1 else y
            elif x_leaf:
                donor = x
            elif y_leaf:
                donor = y
            else:
                raise AssertionError("one of the single children must be a leaf")
            recipient = y if donor == x else x
            moved = children[donor].pop()
            config.set_edge(donor, moved, False)
            config.set_edge(recipient, moved, True)
            states[donor] -= 2  # counter 1 -> 0
            states[recipient] += 2  # counter 1 -> 2
            children[recipient].append(moved)
        if check_invariant:
            tree_size = n - free
            avail = sum(
                1 for s in states if s != FREE and counter_of(s) <= 1
            )
            assert avail == available_nodes(tree_size), (
                f"join-ready count {avail} != {available_nodes(tree_size)} "
                f"at tree size {tree_size}"
            )
            still_ones = sum(
                1 for s in states if s != FREE and counter_of(s) == 1
            )
            assert still_ones <= 1, "rebalance left more than one one-child node"
    return steps


def balls_bins_empty_expectation(bins: int, balls: int) -> float:
    """Expected number of empty bins after throwing `balls` balls uniformly."""
    if bins < 1:
        raise ValueError("need at least one bin")
    if balls < 0:
        raise ValueError("ball count cannot be negative")
    return bins * (1.0 - 1.0 / bins) ** balls


@dataclass(frozen=True)
class OracleResult:
    n: int
    analytic_expected_steps: float
    simulated_mean_steps: float
    reps: int
    relative_error: float


def simulate_oracle(n: int, reps: int, seed: int) -> OracleResult:
    """Monte-Carlo mean of the rebalanced process against its closed form."""
    analytic = expected_steps_upper(n)
    simulated = float(np.mean(run_restricted_process_many(n, reps, seed)))
    return OracleResult(
        n=n,
        analytic_expected_steps=analytic,
        simulated_mean_steps=simulated,
        reps=reps,
        relative_error=abs(simulated - analytic) / analytic,
    )

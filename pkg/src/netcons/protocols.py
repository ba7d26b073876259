"""Builders for the three shipped protocols and their start configurations.

All three start from one leader among free nodes and only ever activate
edges.  The two tree builders count children in the node state; the
cross-edges builder counts active degree (each node's counter moves in
lockstep with its degree, including the edge a joining node arrives with).
"""

from __future__ import annotations

from .core import FREE, Configuration, Protocol, Triple, leader, ordinary

TWO_SLOT = "two-slot"
K_SLOT = "k-slot"
CROSS_EDGES = "cross-edges"

PROTOCOL_NAMES = (TWO_SLOT, K_SLOT, CROSS_EDGES)
TREE_PROTOCOLS = (TWO_SLOT, K_SLOT)


def _attach_rules(k: int, joiner_state: int) -> dict[Triple, Triple]:
    rules: dict[Triple, Triple] = {}
    for x in range(k):
        rules[(leader(x), FREE, 0)] = (leader(x + 1), joiner_state, 1)
        rules[(ordinary(x), FREE, 0)] = (ordinary(x + 1), joiner_state, 1)
    return rules


def two_slot() -> Protocol:
    """Spanning-tree builder where every node accepts at most two children."""
    return Protocol(TWO_SLOT, 2, _attach_rules(2, ordinary(0)))


def k_slot(k: int) -> Protocol:
    """Spanning-tree builder where every node accepts at most k children."""
    if k < 2:
        raise ValueError(f"k-slot requires k >= 2, got {k}")
    return Protocol(K_SLOT, k, _attach_rules(k, ordinary(0)))


def cross_edges_tree(k: int) -> Protocol:
    """Near-regular network builder: tree growth plus cross links between
    low-degree members, bounding every degree by k.

    A joining node enters with counter 1 so counters track degree; cross
    links fire only while both endpoints are below degree k-1.
    """
    if k < 3:
        raise ValueError(f"cross-edges requires k >= 3, got {k}")
    rules = _attach_rules(k, ordinary(1))
    for x in range(k - 1):
        for y in range(k - 1):
            rules[(leader(x), ordinary(y), 0)] = (leader(x + 1), ordinary(y + 1), 1)
            rules[(ordinary(x), ordinary(y), 0)] = (ordinary(x + 1), ordinary(y + 1), 1)
    return Protocol(CROSS_EDGES, k, rules)


def protocol_from_name(name: str, k: int | None = None) -> Protocol:
    """Build a shipped protocol from its CLI/config name."""
    if name == TWO_SLOT:
        if k not in (None, 2):
            raise ValueError("two-slot has fixed k=2")
        return two_slot()
    if name == K_SLOT:
        if k is None:
            raise ValueError("k-slot requires a k parameter")
        return k_slot(k)
    if name == CROSS_EDGES:
        if k is None:
            raise ValueError("cross-edges requires a k parameter")
        return cross_edges_tree(k)
    raise ValueError(f"unknown protocol name: {name!r}")


def initial_configuration(n: int, protocol: Protocol, leader_id: int = 0) -> Configuration:
    """All nodes free except one leader; no active edges."""
    if n < 1:
        raise ValueError("population size must be at least 1")
    if not 0 <= leader_id < n:
        raise ValueError(f"leader id {leader_id} out of range for n={n}")
    states = [protocol.initial_state] * n
    states[leader_id] = protocol.leader_state
    return Configuration(states)

"""Graph-language membership predicates and stabilization invariants."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import FREE, Configuration, Protocol, counter_of, is_stable_naive
from .protocols import CROSS_EDGES, TREE_PROTOCOLS, cross_edges_tree


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over explicit vertex ids."""

    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    root: int | None = None

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) leaves the vertex set")
            pair = (u, v) if u < v else (v, u)
            if pair in normalized:
                raise ValueError(f"duplicate edge ({u}, {v})")
            normalized.add(pair)
        object.__setattr__(self, "edges", frozenset(normalized))

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {u: [] for u in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> dict[int, int]:
        return {u: len(nbrs) for u, nbrs in self.adjacency().items()}


def _reachable(adj: dict[int, list[int]], start: int) -> set[int]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nbr in adj[node]:
            if nbr not in seen:
                seen.add(nbr)
                frontier.append(nbr)
    return seen


def is_k_children_tree(g: Graph, root: int, k: int) -> bool:
    """True iff g is a spanning tree that, rooted at `root`, keeps every
    node at or below k children."""
    if root not in set(g.vertices):
        raise ValueError(f"root {root} is not a vertex")
    size = len(g.vertices)
    if len(g.edges) != size - 1:
        return False
    adj = g.adjacency()
    if len(_reachable(adj, root)) != size:
        return False
    # A connected graph with size-1 edges is a tree; children = deg - 1 off-root.
    for u, nbrs in adj.items():
        children = len(nbrs) if u == root else len(nbrs) - 1
        if children > k:
            return False
    return True


def is_lk_regular(g: Graph, l: int, k: int, require_spanning: bool = True) -> bool:
    """True iff nodes of degree below l form a clique and every other node
    has degree in [l, k]; with `require_spanning` the graph must also be
    connected over its whole vertex set."""
    if l >= k:
        raise ValueError(f"need l < k, got l={l}, k={k}")
    adj = g.adjacency()
    if require_spanning:
        if not g.vertices:
            return False
        if len(_reachable(adj, g.vertices[0])) != len(g.vertices):
            return False
    degrees = {u: len(nbrs) for u, nbrs in adj.items()}
    low = [u for u, d in degrees.items() if d < l]
    for u, d in degrees.items():
        if d > k:
            return False
    neighbor_sets = {u: set(adj[u]) for u in low}
    for i, u in enumerate(low):
        for v in low[i + 1 :]:
            if v not in neighbor_sets[u]:
                return False
    return True


def fast_stable(config: Configuration, protocol: Protocol) -> bool:
    """Counter-based stability predicate, equivalent to is_stable_naive for
    the shipped protocols.

    Trees: stable exactly when no free node remains (an open slot always
    exists while the tree is not spanning).  Cross-edges: additionally all
    pairs of nodes with counter <= k-2 must already be linked.
    """
    if protocol.name in TREE_PROTOCOLS:
        return config.free_count() == 0
    if protocol.name != CROSS_EDGES:
        raise ValueError(f"no fast stability predicate for protocol {protocol.name!r}")
    if config.free_count() != 0:
        return False
    low_cap = 2 * (protocol.k - 2) + 2
    low = [u for u, s in enumerate(config.states) if FREE < s <= low_cap]
    for i, u in enumerate(low):
        for v in low[i + 1 :]:
            if not config.has_edge(u, v):
                return False
    return True


@dataclass(frozen=True)
class StabilityReport:
    """Counter and degree census of a stabilized cross-edges configuration."""

    free_count: int
    below_k_count: int
    low_degree_ids: list[int] = field(default_factory=list)
    low_degree_is_clique: bool = True
    isolated_count: int = 0
    high_degree_count: int = 0  # nodes sitting at counter k-1 or k (reported, not enforced)


class InvariantViolation(AssertionError):
    """A stabilized configuration broke a guaranteed stabilization property."""


def stability_invariants(config: Configuration, k: int) -> StabilityReport:
    """Census a stabilized cross-edges configuration and enforce its
    guaranteed properties: no free or isolated nodes, at least one node
    below counter k, and at most k-2 low-counter nodes forming a clique.
    """
    if config.n <= 3:
        raise ValueError("stabilization invariants need n > 3")
    protocol = cross_edges_tree(k)
    if not fast_stable(config, protocol):
        raise RuntimeError("stability_invariants requires a stabilized configuration")

    free_count = config.free_count()
    counters = [counter_of(s) for s in config.states if s != FREE]
    below_k_count = sum(1 for c in counters if c < k)
    low_cap = 2 * (k - 2) + 2
    low_ids = [u for u, s in enumerate(config.states) if FREE < s <= low_cap]
    clique = all(
        config.has_edge(u, v) for i, u in enumerate(low_ids) for v in low_ids[i + 1 :]
    )
    isolated = sum(1 for d in config.degrees if d == 0)
    high = sum(1 for c in counters if c >= k - 1)
    report = StabilityReport(
        free_count=free_count,
        below_k_count=below_k_count,
        low_degree_ids=low_ids,
        low_degree_is_clique=clique,
        isolated_count=isolated,
        high_degree_count=high,
    )

    if below_k_count < 1:
        raise InvariantViolation("stabilized run has no node below counter k")
    if isolated != 0:
        raise InvariantViolation(f"stabilized run left {isolated} isolated node(s)")
    if len(low_ids) > k - 2:
        raise InvariantViolation(
            f"stabilized run has {len(low_ids)} low-counter nodes, bound is {k - 2}"
        )
    if not clique:
        raise InvariantViolation("low-counter nodes do not form a clique")
    return report


def rooted_canonical_code(g: Graph, root: int) -> tuple:
    """Canonical encoding of a rooted tree: each node's code is the sorted
    tuple of its children's codes.  Equal codes == isomorphic rooted trees."""
    adj = g.adjacency()

    def encode(node: int, parent: int | None) -> tuple:
        return tuple(sorted(encode(child, node) for child in adj[node] if child != parent))

    return encode(root, None)


def assert_matches_naive(config: Configuration, protocol: Protocol) -> bool:
    """Cross-check the fast predicate against the exhaustive reference."""
    fast = fast_stable(config, protocol)
    naive = is_stable_naive(config, protocol)
    if fast != naive:
        raise AssertionError(
            f"stability predicates disagree (fast={fast}, naive={naive}) "
            f"for {protocol.name} on n={config.n}"
        )
    return fast

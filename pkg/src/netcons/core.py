"""Model core: node states, rule tables, configurations, encounters.

Agents are finite-state nodes on a complete interaction graph whose edges
carry a binary active/inactive flag.  A protocol is a table of effective
transitions over (initiator state, responder state, edge bit) triples; an
encounter applies the first matching orientation of the scheduled pair.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Optional

# Node-state encoding, packed into a single int so configurations are flat
# int lists and rule keys hash fast:
#   FREE      -> 0
#   Leader(i) -> 1 + 2*i   (odd)
#   Ordin.(i) -> 2 + 2*i   (even, nonzero)
FREE = 0


def leader(i: int) -> int:
    return 1 + 2 * i


def ordinary(i: int) -> int:
    return 2 + 2 * i


def is_free(state: int) -> bool:
    return state == FREE


def is_leader(state: int) -> bool:
    return state >= 1 and state & 1 == 1


def is_ordinary(state: int) -> bool:
    return state >= 2 and state & 1 == 0


def counter_of(state: int) -> int:
    """Slot counter carried by a non-free state (children or degree)."""
    if state == FREE:
        raise ValueError("free nodes carry no counter")
    return (state - 1) >> 1


def state_label(state: int) -> str:
    if state == FREE:
        return "F"
    prefix = "L" if state & 1 else "O"
    return f"{prefix}{counter_of(state)}"


def parse_state(text: str) -> int:
    if text == "F":
        return FREE
    if len(text) >= 2 and text[0] in "LO" and text[1:].isdigit():
        i = int(text[1:])
        return leader(i) if text[0] == "L" else ordinary(i)
    raise ValueError(f"unrecognized state label: {text!r}")


Triple = tuple[int, int, int]  # (initiator state, responder state, edge bit)


class TransitionRule(NamedTuple):
    pre: Triple
    post: Triple


class Protocol:
    """A named rule table plus its start/leader/output state designations.

    ``rules`` maps pre-triples to post-triples; only effective transitions
    (pre != post) are stored, absent triples are no-ops.  Instances are
    treated as immutable once built.
    """

    def __init__(
        self,
        name: str,
        k: int,
        rules: dict[Triple, Triple],
        initial_state: int = FREE,
        leader_state: int = leader(0),
        output_states: Optional[frozenset[int]] = None,
    ):
        if initial_state != FREE:
            raise ValueError("initial state must be the free state")
        if leader_state == initial_state:
            raise ValueError("leader state must differ from the initial state")
        for pre, post in rules.items():
            if pre == post:
                raise ValueError(f"ineffective rule stored: {pre} -> {post}")
            for s in (*pre[:2], *post[:2]):
                if s != FREE and counter_of(s) > k:
                    raise ValueError(f"state {state_label(s)} exceeds counter bound k={k}")
            if pre[2] not in (0, 1) or post[2] not in (0, 1):
                raise ValueError("edge bits must be 0 or 1")
        self.name = name
        self.k = k
        self.rules = dict(rules)
        self.initial_state = initial_state
        self.leader_state = leader_state
        self.output_states = output_states  # None means every state is an output state
        # Flat int-keyed table for hot loops: key = (a*base + b)*2 + ebit.
        # The base must exceed every reachable state value (counter <= k).
        self._key_base = 2 * k + 3
        self._flat = {
            (pre[0] * self._key_base + pre[1]) * 2 + pre[2]: post
            for pre, post in rules.items()
        }

    def __repr__(self):
        return f"Protocol({self.name!r}, k={self.k}, rules={len(self.rules)})"

    def rule_key(self, a: int, b: int, e: int) -> int:
        return (a * self._key_base + b) * 2 + e

    def flat_rules(self) -> dict[int, Triple]:
        return self._flat

    def is_output(self, state: int) -> bool:
        return self.output_states is None or state in self.output_states


def lookup_rule(protocol: Protocol, a: int, b: int, e: int) -> Optional[TransitionRule]:
    """Return the unique rule with pre (a, b, e), or None if the triple is a no-op."""
    post = protocol.rules.get((a, b, e))
    if post is None:
        return None
    return TransitionRule((a, b, e), post)


class Configuration:
    """Mutable population snapshot: per-node states, active edges, degree cache.

    Edges are kept as packed ints u*n + v with u < v; degrees[u] always equals
    the number of active edges at u.
    """

    __slots__ = ("n", "states", "degrees", "_edges")

    def __init__(self, states: list[int]):
        if not states:
            raise ValueError("population must have at least one node")
        self.n = len(states)
        self.states = list(states)
        self.degrees = [0] * self.n
        self._edges: set[int] = set()

    def copy(self) -> "Configuration":
        dup = Configuration(self.states)
        dup.degrees = self.degrees[:]
        dup._edges = set(self._edges)
        return dup

    def edge_count(self) -> int:
        return len(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return u * self.n + v in self._edges

    def set_edge(self, u: int, v: int, active: bool) -> None:
        if u == v:
            raise ValueError("self-edges are not part of the interaction graph")
        if u > v:
            u, v = v, u
        key = u * self.n + v
        if active and key not in self._edges:
            self._edges.add(key)
            self.degrees[u] += 1
            self.degrees[v] += 1
        elif not active and key in self._edges:
            self._edges.remove(key)
            self.degrees[u] -= 1
            self.degrees[v] -= 1

    def edges(self) -> Iterator[tuple[int, int]]:
        n = self.n
        for key in sorted(self._edges):
            yield divmod(key, n)

    def packed_edges(self) -> set[int]:
        return self._edges

    def free_count(self) -> int:
        return sum(1 for s in self.states if s == FREE)

    def recount_degrees(self) -> list[int]:
        """Recompute degrees from the edge set (coherence oracle for the cache)."""
        fresh = [0] * self.n
        for u, v in self.edges():
            fresh[u] += 1
            fresh[v] += 1
        return fresh


def apply_encounter(
    config: Configuration, protocol: Protocol, u: int, v: int, orientation_coin: bool
) -> bool:
    """Apply one scheduled encounter of u and v in place.

    Tries orientation (u, v) first when the coin is set, (v, u) otherwise,
    then the opposite one; the first matching rule fires.  Returns whether
    any rule fired; on False the configuration is untouched.
    """
    if u == v:
        raise ValueError("encounter requires two distinct nodes")
    if not (0 <= u < config.n and 0 <= v < config.n):
        raise ValueError("node id out of range")
    first, second = ((u, v), (v, u)) if orientation_coin else ((v, u), (u, v))
    states = config.states
    ebit = 1 if config.has_edge(u, v) else 0
    for x, y in (first, second):
        post = protocol.rules.get((states[x], states[y], ebit))
        if post is not None:
            states[x], states[y] = post[0], post[1]
            if post[2] != ebit:
                config.set_edge(u, v, post[2] == 1)
            return True
    return False


def is_stable_naive(config: Configuration, protocol: Protocol) -> bool:
    """Reference stability test: no pair admits an effective transition.

    Checks both orientations of all n(n-1)/2 pairs against the rule table;
    quadratic, used as the oracle for the per-protocol fast predicates.
    """
    states = config.states
    rules = protocol.rules
    n = config.n
    edges = config.packed_edges()
    for u in range(n):
        su = states[u]
        base = u * n
        for v in range(u + 1, n):
            sv = states[v]
            e = 1 if base + v in edges else 0
            if (su, sv, e) in rules or (sv, su, e) in rules:
                return False
    return True


def output_graph(config: Configuration, protocol: Protocol):
    """Active subgraph induced by the nodes whose state is an output state."""
    from .validators import Graph

    members = [u for u in range(config.n) if protocol.is_output(config.states[u])]
    member_set = set(members)
    edges = frozenset(
        (u, v) for u, v in config.edges() if u in member_set and v in member_set
    )
    root = None
    for u in members:
        if is_leader(config.states[u]):
            root = u
            break
    return Graph(vertices=tuple(members), edges=edges, root=root)


def write_snapshot(config: Configuration, protocol: Protocol) -> str:
    """Line-oriented text snapshot; round-trips bit-exactly via parse_snapshot."""
    lines = [f"n={config.n} protocol={protocol.name} k={protocol.k}"]
    lines.extend(f"{u} {state_label(s)}" for u, s in enumerate(config.states))
    lines.extend(f"{u} {v}" for u, v in config.edges())
    return "\n".join(lines) + "\n"


def parse_snapshot(text: str) -> tuple[Configuration, str, int]:
    """Parse a snapshot; returns (configuration, protocol name, k)."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty snapshot")
    header = lines[0].split()
    fields = dict(part.split("=", 1) for part in header if "=" in part)
    try:
        n = int(fields["n"])
        name = fields["protocol"]
        k = int(fields["k"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed snapshot header: {lines[0]!r}") from exc
    if len(lines) < 1 + n:
        raise ValueError("snapshot truncated: missing node lines")
    states = [0] * n
    for line in lines[1 : 1 + n]:
        node_text, state_text = line.split()
        states[int(node_text)] = parse_state(state_text)
    config = Configuration(states)
    for line in lines[1 + n :]:
        if not line.strip():
            continue
        u_text, v_text = line.split()
        config.set_edge(int(u_text), int(v_text), True)
    return config, name, k

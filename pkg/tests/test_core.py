import pytest

from netcons.core import (
    FREE,
    Configuration,
    Protocol,
    apply_encounter,
    counter_of,
    is_stable_naive,
    leader,
    lookup_rule,
    ordinary,
    output_graph,
    parse_snapshot,
    parse_state,
    state_label,
    write_snapshot,
)
from netcons.protocols import cross_edges_tree, initial_configuration, two_slot
from netcons.rng import Stream
from netcons.runner import run_full, step


def test_state_encoding_round_trip():
    labels = ["F", "L0", "L5", "O0", "O12"]
    for text in labels:
        assert state_label(parse_state(text)) == text
    assert parse_state("F") == FREE
    assert parse_state("L2") == leader(2)
    assert parse_state("O3") == ordinary(3)
    with pytest.raises(ValueError):
        parse_state("X1")
    with pytest.raises(ValueError):
        counter_of(FREE)
    assert counter_of(leader(4)) == 4
    assert counter_of(ordinary(0)) == 0


def test_lookup_rule_two_slot_examples():
    p = two_slot()
    rule = lookup_rule(p, leader(0), FREE, 0)
    assert rule is not None
    assert rule.post == (leader(1), ordinary(0), 1)
    assert lookup_rule(p, ordinary(2), FREE, 0) is None
    assert lookup_rule(p, FREE, FREE, 0) is None


def test_protocol_rejects_ineffective_and_out_of_range_rules():
    with pytest.raises(ValueError):
        Protocol("bad", 2, {(leader(0), FREE, 0): (leader(0), FREE, 0)})
    with pytest.raises(ValueError):
        Protocol("bad", 2, {(leader(3), FREE, 0): (leader(2), FREE, 1)})
    with pytest.raises(ValueError):
        Protocol("bad", 2, {(leader(0), FREE, 0): (leader(1), ordinary(0), 2)})
    with pytest.raises(ValueError):
        Protocol("bad", 2, {}, initial_state=leader(0))
    with pytest.raises(ValueError):
        Protocol("bad", 2, {}, leader_state=FREE)


def test_apply_encounter_leader_attach():
    p = two_slot()
    config = initial_configuration(5, p)
    assert apply_encounter(config, p, 0, 3, True)
    assert config.states[0] == leader(1)
    assert config.states[3] == ordinary(0)
    assert config.has_edge(0, 3)
    assert config.degrees[0] == 1 and config.degrees[3] == 1


def test_apply_encounter_ineffective_is_a_bitwise_noop():
    p = two_slot()
    config = initial_configuration(6, p)
    apply_encounter(config, p, 0, 1, True)
    before = write_snapshot(config, p)
    assert not apply_encounter(config, p, 2, 3, True)  # two free nodes
    assert write_snapshot(config, p) == before


def test_apply_encounter_cross_rule():
    p = cross_edges_tree(3)
    config = Configuration([ordinary(1), ordinary(0), leader(2)])
    assert apply_encounter(config, p, 0, 1, True)
    assert config.states[0] == ordinary(2)
    assert config.states[1] == ordinary(1)
    assert config.has_edge(0, 1)


def test_apply_encounter_orientation_coin():
    a, b = leader(0), ordinary(0)
    rules = {
        (a, b, 0): (leader(1), ordinary(0), 1),
        (b, a, 0): (ordinary(1), leader(2), 1),
    }
    p = Protocol("asym", 2, rules)
    config = Configuration([a, b])
    assert apply_encounter(config, p, 0, 1, True)  # orientation (0, 1) first
    assert (config.states[0], config.states[1]) == (leader(1), ordinary(0))

    config = Configuration([a, b])
    assert apply_encounter(config, p, 0, 1, False)  # orientation (1, 0) first
    assert (config.states[0], config.states[1]) == (leader(2), ordinary(1))


def test_apply_encounter_falls_back_to_other_orientation():
    p = two_slot()
    config = initial_configuration(3, p)
    # only orientation (leader, free) matches; coin pointing the other way
    # must still fire the rule
    assert apply_encounter(config, p, 1, 0, True)
    assert config.states[0] == leader(1)


def test_apply_encounter_supports_edge_deactivation():
    detach = Protocol(
        "detach",
        2,
        {
            (leader(0), FREE, 0): (leader(1), ordinary(0), 1),
            (leader(1), ordinary(0), 1): (leader(0), FREE, 0),
        },
    )
    config = initial_configuration(2, detach)
    assert apply_encounter(config, detach, 0, 1, True)
    assert config.has_edge(0, 1)
    assert apply_encounter(config, detach, 0, 1, True)
    assert not config.has_edge(0, 1)
    assert config.degrees == [0, 0]
    assert config.states == [leader(0), FREE]


def test_apply_encounter_argument_errors():
    p = two_slot()
    config = initial_configuration(4, p)
    with pytest.raises(ValueError):
        apply_encounter(config, p, 1, 1, True)
    with pytest.raises(ValueError):
        apply_encounter(config, p, 0, 4, True)


def test_is_stable_naive_hand_built_examples():
    p = two_slot()
    # leader with two children: no pair matches any rule
    config = Configuration([leader(2), ordinary(0), ordinary(0)])
    config.set_edge(0, 1, True)
    config.set_edge(0, 2, True)
    # independent exhaustive check against the rule table
    for u in range(3):
        for v in range(u + 1, 3):
            e = 1 if config.has_edge(u, v) else 0
            assert lookup_rule(p, config.states[u], config.states[v], e) is None
            assert lookup_rule(p, config.states[v], config.states[u], e) is None
    assert is_stable_naive(config, p)

    # any configuration with a free node is unstable
    unstable = Configuration([leader(2), ordinary(0), FREE])
    unstable.set_edge(0, 1, True)
    assert not is_stable_naive(unstable, p)

    # single node: no pairs at all
    single = initial_configuration(1, cross_edges_tree(3))
    assert is_stable_naive(single, cross_edges_tree(3))


def test_degree_cache_coherence_under_random_encounters():
    p = cross_edges_tree(4)
    config = initial_configuration(30, p)
    stream = Stream(99)
    for _ in range(4000):
        step(config, p, stream)
    assert config.degrees == config.recount_degrees()


def test_edge_monotonicity_of_shipped_rule_tables():
    from netcons.protocols import k_slot

    for p in (two_slot(), k_slot(5), cross_edges_tree(4)):
        for pre, post in p.rules.items():
            assert pre[2] == 0 and post[2] == 1


def test_output_graph_initial_and_stable():
    p = two_slot()
    config = initial_configuration(5, p)
    g = output_graph(config, p)
    assert len(g.vertices) == 5 and not g.edges

    rec, final = run_full(p, 5, seed=3)
    assert rec.stabilized
    g = output_graph(final, p)
    assert len(g.edges) == 4
    assert g.root is not None


def test_output_graph_mid_run_leader_component_plus_isolated_free():
    # replaying this seed, the 12th step leaves exactly two free nodes
    p = two_slot()
    config = initial_configuration(8, p)
    stream = Stream(2024)
    for _ in range(12):
        step(config, p, stream)
    assert config.free_count() == 2
    g = output_graph(config, p)  # output states default to every state
    assert len(g.vertices) == 8
    isolated = [u for u in g.vertices if all(u not in e for e in g.edges)]
    assert len(isolated) == 2
    from netcons.validators import Graph, _reachable

    non_free = [u for u in range(8) if config.states[u] != FREE]
    adj = Graph(tuple(g.vertices), g.edges).adjacency()
    leader_id = g.root
    assert sorted(_reachable(adj, leader_id)) == sorted(non_free)


def test_output_graph_respects_narrow_output_states():
    rules = dict(two_slot().rules)
    p = Protocol("narrow", 2, rules, output_states=frozenset([leader(2), ordinary(0)]))
    config = Configuration([leader(2), ordinary(0), ordinary(1)])
    config.set_edge(0, 1, True)
    config.set_edge(0, 2, True)
    g = output_graph(config, p)
    assert set(g.vertices) == {0, 1}
    assert g.edges == frozenset({(0, 1)})


def test_snapshot_round_trip_bit_exact():
    p = cross_edges_tree(3)
    rec, config = run_full(p, 40, seed=77)
    text = write_snapshot(config, p)
    parsed, name, k = parse_snapshot(text)
    assert (name, k) == (p.name, p.k)
    assert write_snapshot(parsed, p) == text
    assert parsed.states == config.states
    assert parsed.degrees == config.degrees
    assert sorted(parsed.edges()) == sorted(config.edges())


def test_snapshot_round_trip_initial_n4():
    p = two_slot()
    config = initial_configuration(4, p)
    text = write_snapshot(config, p)
    assert text.splitlines()[0] == "n=4 protocol=two-slot k=2"
    parsed, _, _ = parse_snapshot(text)
    assert write_snapshot(parsed, p) == text


def test_snapshot_parse_errors():
    with pytest.raises(ValueError):
        parse_snapshot("")
    with pytest.raises(ValueError):
        parse_snapshot("bogus header\n")
    with pytest.raises(ValueError):
        parse_snapshot("n=3 protocol=two-slot k=2\n0 F\n")

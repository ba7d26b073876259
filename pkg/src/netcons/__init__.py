"""netcons: network formation by finite-state agents under random pairwise interactions."""

from .core import (
    FREE,
    Configuration,
    Protocol,
    TransitionRule,
    apply_encounter,
    counter_of,
    is_stable_naive,
    leader,
    lookup_rule,
    ordinary,
    output_graph,
    parse_snapshot,
    write_snapshot,
)
from .oracle import (
    OracleResult,
    available_nodes,
    balls_bins_empty_expectation,
    expected_steps_upper,
    run_restricted_process,
    simulate_oracle,
)
from .protocols import (
    cross_edges_tree,
    initial_configuration,
    k_slot,
    protocol_from_name,
    two_slot,
)
from .runner import RunRecord, run_full, run_to_stabilization, step
from .validators import (
    Graph,
    StabilityReport,
    fast_stable,
    is_k_children_tree,
    is_lk_regular,
    stability_invariants,
)

__version__ = "0.1.0"

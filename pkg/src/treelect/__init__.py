"""Deterministic leader election in anonymous port-labeled trees with
oracle-assigned per-node advice: advice constructions, ball-local electors,
lower-bound tree families, and a verification harness."""

from .tree import (
    AdviceAssignment,
    BallOracle,
    CenterInfo,
    LabeledBall,
    PortLabeledTree,
    balls_equal,
    build_tree,
    diameter_and_center,
    extract_ball,
    follow_path,
    path_ports,
)
from .codec import (
    Malformed,
    UnboundedAdviceRecord,
    decode_sequence,
    encode_sequence,
    insert_separators,
    pack_record,
    remove_separators,
    unpack_record,
)
from .unbounded import advice_unbounded, elect_unbounded
from .bounded import (
    BetaPair,
    SchemeParams,
    bounded_valency_advice,
    bounded_valency_election,
    colored_map_advice,
    elect_colored_map,
    election_index,
    solve_betas,
)
from .harness import (
    ElectionOutcome,
    measure_advice,
    random_tree,
    random_tree_with_diameter,
    run_election,
    verify_outputs,
)

__all__ = [name for name in dir() if not name.startswith("_")]

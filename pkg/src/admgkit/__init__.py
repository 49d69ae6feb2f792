"""ADMG toolkit: walk algebra, graph transforms, exact discrete Markov model
checkers, and a recursive-substitution causal simulator."""

from .graph_core import (
    CondADMG,
    DirectedMixedGraph,
    GraphError,
    GraphParseError,
    classify,
    exogenous_vertices,
    induced_subgraph,
    is_acyclic,
    parse_graph,
    serialize_graph,
    topological_orders,
)
from .walk_algebra import (
    SeparationQuery,
    Walk,
    ancestors,
    ancestral_closure,
    arc_connected,
    children,
    descendants,
    district,
    m_connected,
    m_connected_oracle,
    markov_background,
    markov_boundary,
    parents,
)
from .graph_transform import (
    BidirectedClique,
    TildeFixedGraph,
    UndirectedGraph,
    augment,
    enumerate_bidirected_cliques,
    expand_clique,
    expand_noise,
    expand_pairwise,
    fix_graph,
    fixable_sets,
    is_fixable,
    marginalize,
    swig,
    tilde_fix_graph,
    undirected_separated,
)
from .dist_core import (
    DistributionError,
    JointTable,
    Kernel,
    StateSpace,
    ci_holds,
    extended_ci_holds,
    fix_dist,
    marginal,
    table_from_json,
    table_to_json,
)
from .markov_checks import (
    CheckReport,
    Violation,
    check_augmentation,
    check_ef,
    check_factorization,
    check_gm,
    check_lm,
    check_nm,
    check_um,
    relation_matrix,
)
from .causal_sim import (
    EquationSystem,
    PotentialOutcomeQuery,
    generate_system,
    induced_joint,
    po_distribution,
    system_from_json,
    system_to_json,
    verify_consistency,
    verify_fixing_identity,
    verify_no_direct_effect,
    verify_swig_markov,
)

__version__ = "0.1.0"

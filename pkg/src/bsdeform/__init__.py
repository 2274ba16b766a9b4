"""Bowen-Series boundary maps for cocompact triangle groups and their one-parameter deformations."""

from .analysis import (
    AnalysisReport,
    MarkovResult,
    TransitionMatrix,
    analyze,
    aperiodicity_check,
    hyperbolic_alpha,
    markov_check,
    surjectivity_empirical,
    surjectivity_predicate,
    transition_matrix,
)
from .config import Config, Tolerances
from .dynamics import (
    BoundaryMap,
    MatchingTable,
    OrbitRecord,
    collision_audit,
    deformed_map,
    f_eval,
    giant_step_map,
    index_sequence,
    matching_index,
    matching_sets,
    orbit,
    theta,
)
from .geometry import (
    CircleArc,
    Geodesic,
    MoebiusMap,
    apply_boundary,
    arc_contains,
    classify,
    compose,
    elliptic_about,
    fixed_points_on_circle,
    geodesic_between,
    isometric_circle,
)
from .group import (
    FundamentalDomain,
    Signature,
    build_domain,
    classify_signature,
    verify_relations,
    word_to_map,
)
from .netpartition import NetData, VertexFan, a_region, branch_of, build_net, interval_L, interval_R, overlap

__version__ = "0.1.0"

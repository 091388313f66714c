"""beliefx: explanations over propositional knowledge and weighted belief bases.

The package computes monolithic explanations (smallest entailing clause
subsets), model-reconciling explanations (additions/retractions against a
second knowledge base), and their probabilistic, k-bounded counterparts over
log-linear belief bases, together with gain/power metrics, generators for
benchmark instances, and a command-line interface.
"""

from .formulas import (
    HARD,
    BeliefBase,
    Clause,
    KnowledgeBase,
    LimitError,
    ParseError,
    PreconditionError,
    Query,
    SolveTimeout,
    WeightedClause,
    World,
    classical_projection,
    format_weight,
    negate_query,
    parse_cnf,
    parse_query,
    parse_wcnf,
    write_cnf,
    write_query,
    write_wcnf,
)
from .sat import SatResult, backbone, entails, is_sat
from .minsets import (
    CorrectionSet,
    HittingSetInstance,
    SoftHardProblem,
    enumerate_mcses,
    get_mcs,
    min_hitting_set,
)
from .probability import (
    Distribution,
    LogScore,
    RankedWorld,
    cond_prob,
    distribution,
    intersections,
    log_partition,
    mpe,
    prob,
    top_k_worlds,
    world_score,
)
from .explain import (
    KBound,
    MonolithicExplanation,
    ReconcilingExplanation,
    gain_mono,
    gain_mrp,
    model_reconciling_explanation,
    monolithic_explanation,
    most_preferred,
    power_mono,
    power_mrp,
    prob_model_reconciling,
    prob_monolithic,
)
from .bench import (
    BenchConfig,
    BenchRecord,
    assign_random_weights,
    backbone_query,
    build_office_robot,
    gen_random_cnf,
    make_human_scenario,
    office_robot_variables,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "HARD",
    "BeliefBase",
    "BenchConfig",
    "BenchRecord",
    "Clause",
    "CorrectionSet",
    "Distribution",
    "HittingSetInstance",
    "KBound",
    "KnowledgeBase",
    "LimitError",
    "LogScore",
    "MonolithicExplanation",
    "ParseError",
    "PreconditionError",
    "Query",
    "RankedWorld",
    "ReconcilingExplanation",
    "SatResult",
    "SoftHardProblem",
    "SolveTimeout",
    "WeightedClause",
    "World",
    "assign_random_weights",
    "backbone",
    "backbone_query",
    "build_office_robot",
    "classical_projection",
    "cond_prob",
    "distribution",
    "entails",
    "enumerate_mcses",
    "format_weight",
    "gain_mono",
    "gain_mrp",
    "gen_random_cnf",
    "get_mcs",
    "intersections",
    "is_sat",
    "log_partition",
    "make_human_scenario",
    "min_hitting_set",
    "model_reconciling_explanation",
    "monolithic_explanation",
    "most_preferred",
    "mpe",
    "negate_query",
    "office_robot_variables",
    "parse_cnf",
    "parse_query",
    "parse_wcnf",
    "power_mono",
    "power_mrp",
    "prob",
    "prob_model_reconciling",
    "prob_monolithic",
    "run_suite",
    "top_k_worlds",
    "world_score",
    "write_cnf",
    "write_query",
    "write_wcnf",
]

"""Multi-urn sequential search: exact dynamics, policy costs, optimal
orderings, a brute-force optimality oracle, and a seeded simulator."""

from .dynamics import (
    DrawDistribution,
    SearchState,
    draw_distribution,
    posterior,
    posterior_independent,
    posterior_single_marble,
    survival,
)
from .errors import (
    EnumerationCapError,
    ExhaustedUrnError,
    ImpossibleStateError,
    InvalidPolicyError,
    InvalidProblemError,
    UrnSearchError,
)
from .model import (
    MAX_URNS,
    VALIDATION_EPS,
    PlacementOutcome,
    PriorKind,
    PriorModel,
    Problem,
    Urn,
    ValidationReport,
    build_problem,
    load_problem,
    parse_problem,
    placement_distribution,
    placement_probability,
    prior_probability,
    problem_to_dict,
    validate,
)
from .optimizer import (
    DEFAULT_BLOCK_ENUM_CAP,
    DEFAULT_FULL_ENUM_CAP,
    OptimizationResult,
    independence_index,
    iter_valid_policies,
    optimal_block_enum,
    optimal_block_independent,
    optimal_block_single_marble,
    optimal_full_enum,
    optimize,
    rank_policies,
    single_marble_index,
    valid_policy_count,
)
from .policies import (
    BlockPolicy,
    CostReport,
    Policy,
    block_cost_independent,
    block_cost_single_marble,
    expected_cost,
    parse_policy_text,
    policy_text,
)
from .simulator import (
    SimulationReport,
    draws_per_trial,
    run_trial,
    sample_placement,
    simulate,
    trial_stream,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPolicy",
    "CostReport",
    "DEFAULT_BLOCK_ENUM_CAP",
    "DEFAULT_FULL_ENUM_CAP",
    "DrawDistribution",
    "EnumerationCapError",
    "ExhaustedUrnError",
    "ImpossibleStateError",
    "InvalidPolicyError",
    "InvalidProblemError",
    "MAX_URNS",
    "OptimizationResult",
    "PlacementOutcome",
    "Policy",
    "PriorKind",
    "PriorModel",
    "Problem",
    "SearchState",
    "SimulationReport",
    "Urn",
    "UrnSearchError",
    "VALIDATION_EPS",
    "ValidationReport",
    "block_cost_independent",
    "block_cost_single_marble",
    "build_problem",
    "draw_distribution",
    "draws_per_trial",
    "expected_cost",
    "independence_index",
    "iter_valid_policies",
    "load_problem",
    "optimal_block_enum",
    "optimal_block_independent",
    "optimal_block_single_marble",
    "optimal_full_enum",
    "optimize",
    "parse_policy_text",
    "parse_problem",
    "placement_distribution",
    "placement_probability",
    "policy_text",
    "posterior",
    "posterior_independent",
    "posterior_single_marble",
    "prior_probability",
    "problem_to_dict",
    "rank_policies",
    "run_trial",
    "sample_placement",
    "simulate",
    "single_marble_index",
    "survival",
    "trial_stream",
    "valid_policy_count",
    "validate",
]

"""Core library: ballot spaces, stage geometry, builtin methods and the exhaustive oracle."""

from .logger import get_logger, log_metric
from .config import load_settings
from .errors import (
    SFBCError,
    EmptyElectorateError,
    RankingParseError,
    DimensionMismatchError,
    InvalidSwapError,
    InvalidParameterError,
    MethodStructureError,
    MutualExclusivityError,
    IndecisiveMethodError,
    WeightFitError,
)
from .ballots import (
    Candidate,
    Ranking,
    BallotSpace,
    Profile,
    enumerate_ballots,
    normalize,
    parse_ranking,
    format_ranking,
    parse_profile,
    format_profile,
)
from .geometry import (
    NormalVector,
    SwapOperator,
    VectorCategory,
    CategoryKind,
    inner,
    apply_swap,
    orbit,
    check_boundary_conditions,
    classify_vector,
    positional_vector,
    last_place_vector,
    top_set_vector,
    threshold_vector,
    dominance_vector,
    parse_vector,
)
from .stages import (
    Condition,
    Stage,
    StageType,
    Method,
    Outcome,
    OutcomeKind,
    generate_stage,
    minimal_generators,
    classify_stage,
    evaluate,
)
from .methods import (
    ScoringWeights,
    BuiltinMethod,
    DirectTally,
    tally_points,
    tally_irv,
    pairwise_tiebreak,
    build,
    parse_builtin,
    fit_scoring_weights,
    parse_method,
    load_method,
)
from .oracle import (
    Criterion,
    SearchScope,
    Counterexample,
    Verdict,
    enumerate_profiles,
    check_criterion,
    check_monotonic,
    replay,
)

__all__ = [
    'get_logger',
    'log_metric',
    'load_settings',
    'SFBCError',
    'EmptyElectorateError',
    'RankingParseError',
    'DimensionMismatchError',
    'InvalidSwapError',
    'InvalidParameterError',
    'MethodStructureError',
    'MutualExclusivityError',
    'IndecisiveMethodError',
    'WeightFitError',
    'Candidate',
    'Ranking',
    'BallotSpace',
    'Profile',
    'enumerate_ballots',
    'normalize',
    'parse_ranking',
    'format_ranking',
    'parse_profile',
    'format_profile',
    'NormalVector',
    'SwapOperator',
    'VectorCategory',
    'CategoryKind',
    'inner',
    'apply_swap',
    'orbit',
    'check_boundary_conditions',
    'classify_vector',
    'positional_vector',
    'last_place_vector',
    'top_set_vector',
    'threshold_vector',
    'dominance_vector',
    'parse_vector',
    'Condition',
    'Stage',
    'StageType',
    'Method',
    'Outcome',
    'OutcomeKind',
    'generate_stage',
    'minimal_generators',
    'classify_stage',
    'evaluate',
    'ScoringWeights',
    'BuiltinMethod',
    'DirectTally',
    'tally_points',
    'tally_irv',
    'pairwise_tiebreak',
    'build',
    'parse_builtin',
    'fit_scoring_weights',
    'parse_method',
    'load_method',
    'Criterion',
    'SearchScope',
    'Counterexample',
    'Verdict',
    'enumerate_profiles',
    'check_criterion',
    'check_monotonic',
    'replay',
]

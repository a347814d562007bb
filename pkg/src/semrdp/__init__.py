"""Rate-distortion-perception tradeoff for an indirectly observed binary
semantic source with side information at encoder and decoder.

Closed forms, a branch-decomposed numerical program, an exhaustive
decoder-search oracle, and Monte Carlo coding experiments, all checking
each other.
"""

from .coding_simulator import (
    BlockMetrics,
    TrialConfig,
    TrialReport,
    apply_decoder,
    derive_seed,
    empirical_metrics,
    random_binning_trial,
    run_decoder_trials,
    sample_block,
)
from .errors import (
    AlphabetMismatchError,
    DegenerateChannelError,
    DomainError,
    HypothesisError,
    InfeasibleError,
    LabelError,
    ResourceLimitError,
    SemRdpError,
)
from .probability_core import (
    ChainRuleTerms,
    FiniteDistribution,
    JointDistribution,
    bernoulli,
    binary_entropy,
    chain_rule_decomposition,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    ternary_entropy,
    tv_distance,
)
from .rdpf_closed_form import (
    PiecewiseBreakpoints,
    RdpPoint,
    breakpoints,
    closed_form_rate,
    rdf_pi,
    rdpf_pi,
    rdpf_piecewise,
)
from .rdpf_solver import (
    DecoderLaw,
    DecoderMetrics,
    SolverResult,
    compose_branch_perception,
    evaluate_decoder,
    oracle_min_rate,
    oracle_min_rates,
    shat_marginal,
    solve_min2,
)
from .semantic_model import (
    OBSERVED_TO_SEMANTIC,
    SEMANTIC_TO_OBSERVED,
    ChannelMatrix,
    SemanticModel,
    build_model,
    distortion_transform,
    dsbs_model,
    source_channel_feasible,
)

__version__ = "0.1.0"

"""Differentially private online learning by lazy switching.

A generic batched switching layer turns any multiplicatively updated
measure into a private online learner; shipped instantiations are
multiplicative weights over experts and a regularized Gaussian-shaped
measure over a Euclidean ball for linear OCO. The package also carries
the matching privacy accountant and closed-form tuners, oblivious
adversary generators (including the hard epoch construction for
low-switching learners), a regret harness, and empirical audits of the
distributional and privacy claims.
"""

__version__ = "0.1.0"

from .accountant import (
    PrivacyBudget,
    TunerError,
    advanced_composition,
    cdp_to_approx,
    config_budget,
    group_privacy,
    l2p_privacy,
    modified_advanced_composition,
    tune_oco,
    tune_ope,
)
from .adversaries import (
    LossStream,
    bernoulli_experts,
    epoch_lower_bound_stream,
    linear_oco_stream,
    load_stream,
    neighbor_of,
    save_stream,
)
from .audit import (
    AuditReport,
    empirical_epsilon,
    marginal_tv_profile,
    marginal_tv_test,
    ratio_range_check,
    switch_statistics,
)
from .harness import (
    GameResult,
    MonteCarloSummary,
    best_in_hindsight_oco_ball,
    best_in_hindsight_ope,
    measure_sequence,
    monte_carlo,
    play_game,
    strawman_fixed_switch,
)
from .measures import (
    LinearLoss,
    LossVector,
    MwMeasure,
    RmwMeasure,
    SamplerError,
    effective_eta_rmw,
    log_batch_ratio,
    mw_init,
    mw_update,
    rmw_init,
    rmw_update,
    sample,
)
from .seeding import replicate_seed, splitmix64
from .transform import (
    BatchRecord,
    ConfigError,
    ConfigReport,
    L2PConfig,
    PreparedRun,
    Transcript,
    acceptance_probability,
    run_l2p,
)

__all__ = [
    "AuditReport",
    "BatchRecord",
    "ConfigError",
    "ConfigReport",
    "GameResult",
    "L2PConfig",
    "LinearLoss",
    "LossStream",
    "LossVector",
    "MonteCarloSummary",
    "MwMeasure",
    "PreparedRun",
    "PrivacyBudget",
    "RmwMeasure",
    "SamplerError",
    "Transcript",
    "TunerError",
    "acceptance_probability",
    "advanced_composition",
    "bernoulli_experts",
    "best_in_hindsight_oco_ball",
    "best_in_hindsight_ope",
    "cdp_to_approx",
    "config_budget",
    "effective_eta_rmw",
    "empirical_epsilon",
    "epoch_lower_bound_stream",
    "group_privacy",
    "l2p_privacy",
    "linear_oco_stream",
    "load_stream",
    "log_batch_ratio",
    "marginal_tv_profile",
    "marginal_tv_test",
    "measure_sequence",
    "modified_advanced_composition",
    "monte_carlo",
    "mw_init",
    "mw_update",
    "neighbor_of",
    "play_game",
    "ratio_range_check",
    "replicate_seed",
    "rmw_init",
    "rmw_update",
    "run_l2p",
    "sample",
    "save_stream",
    "splitmix64",
    "strawman_fixed_switch",
    "switch_statistics",
    "tune_oco",
    "tune_ope",
]

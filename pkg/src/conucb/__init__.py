"""Constrained multiple-play bandits with two-level (click, then conversion) rewards."""

from .core import (
    ArmParams,
    ArmStatistics,
    ConfigError,
    InfeasibleInstanceError,
    ProblemInstance,
    RewardSample,
    RoundOutcome,
    compound,
    update_statistics,
)
from .env import ArmTable, ArmTableError, RewardStream, load_arm_table, sample_round, synthetic_instance, write_arm_table
from .harness import ExperimentConfig, compute_oracle_line, run_experiment
from .lp import LpResult, fallback_vector, feasible, solve_constrained_selection
from .metrics import MetricsTrace, cumulative_regret, cumulative_violation, reward_violation_ratio
from .policies import (
    CUCB,
    ConUCB,
    Exp3M,
    OraclePolicy,
    UniformRandom,
    make_policy,
    oracle_policy,
    radius,
    run_policy,
    ucb_indices,
)
from .rounding import dependent_rounding

__version__ = "0.1.0"

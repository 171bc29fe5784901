"""Graphical multiagent models with exact inference and knowledge combination.

A model factors a joint distribution over agents' discrete actions into
per-neighborhood potentials on an interaction graph. The package ships a
technology-partnership game whose regrets induce one such model, a
size/degree change heuristic inducing another, a reinforcement-learning
simulator acting as a behavior ground truth, three ways of combining a model
with play data (direct update, opinion pool, mixing data), and a
reproducible experiment harness with a CLI.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .combine import (
    FitConfig,
    FitError,
    PooledModel,
    direct_update,
    fit_regret_gmm_ml,
    learn_pool_weight,
    mixing_data,
    opinion_pool,
    pool_probability,
    regret_loglik_gradient,
    score_ratio,
)
from .datasets import PlayDataset
from .game import (
    CompanyParams,
    GameInstance,
    Temperatures,
    build_game_instance,
    build_regret_gmm,
    flexibility,
    instance_from_fixture,
    pair_weight,
    payoff,
    regret,
    regret_tables,
)
from .heuristic import HeuristicSpec, build_heuristic_gmm, p_change, sample_heuristic
from .model import (
    Gmm,
    InteractionGraph,
    LocalPotential,
    ModelTooLargeError,
    expectation_of_statistic,
    joint_probability,
    log_partition,
    log_score,
    marginal,
    sample_profiles,
)
from .rl import (
    Policy,
    QTable,
    RlConfig,
    marginal_action_prob,
    rl_iteration,
    run_rl,
    sample_sim_data,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "FitConfig",
    "FitError",
    "PooledModel",
    "direct_update",
    "fit_regret_gmm_ml",
    "learn_pool_weight",
    "mixing_data",
    "opinion_pool",
    "pool_probability",
    "regret_loglik_gradient",
    "score_ratio",
    "PlayDataset",
    "CompanyParams",
    "GameInstance",
    "Temperatures",
    "build_game_instance",
    "build_regret_gmm",
    "flexibility",
    "instance_from_fixture",
    "pair_weight",
    "payoff",
    "regret",
    "regret_tables",
    "HeuristicSpec",
    "build_heuristic_gmm",
    "p_change",
    "sample_heuristic",
    "Gmm",
    "InteractionGraph",
    "LocalPotential",
    "ModelTooLargeError",
    "expectation_of_statistic",
    "joint_probability",
    "log_partition",
    "log_score",
    "marginal",
    "sample_profiles",
    "Policy",
    "QTable",
    "RlConfig",
    "marginal_action_prob",
    "rl_iteration",
    "run_rl",
    "sample_sim_data",
    "__version__",
]

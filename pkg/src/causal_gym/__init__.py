"""Meta-RL workbench for causal learning environments.

Three environment families (binary two-model identification, its
pixel-space wrapper, and a two-phase escape-room grid-world), an exact
Bayesian posterior oracle, and a from-scratch recurrent actor-critic
trained with a policy-gradient/baseline/entropy loss and ADAM.
"""

from .escape import EscapeEnv, EscapeParams, ScriptedEscapePolicy
from .harness import RunConfig
from .net import LossWeights, NetConfig, init_params
from .oracle import Posterior, bayes_accuracy, brute_force_prob, trial_posterior
from .tabular import ModelKind, Setting, TabularEnv, TabularParams
from .training import adam_update, collect_episode, evaluate, train
from .visual import VisualEnv, VisualParams, gaussian_blur, temporal_mix

__version__ = "0.1.0"

__all__ = [
    "EscapeEnv", "EscapeParams", "ScriptedEscapePolicy",
    "RunConfig",
    "LossWeights", "NetConfig", "init_params",
    "Posterior", "bayes_accuracy", "brute_force_prob", "trial_posterior",
    "ModelKind", "Setting", "TabularEnv", "TabularParams",
    "adam_update", "collect_episode", "evaluate", "train",
    "VisualEnv", "VisualParams", "gaussian_blur", "temporal_mix",
]

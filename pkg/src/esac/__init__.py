"""Evolution-based Soft Actor-Critic: ES population search with gated SAC updates.

Submodules:

- ``nnet``: MLPs on flat parameter vectors, manual backprop, Adam
- ``envs``: cyclic-mdp, pendulum, pointmass-sparse
- ``es``, ``amt``: ES population and update, automatic mutation tuning
- ``sac``: soft actor-critic losses, gradients and agent
- ``orchestrator``: the ESAC generation loop
- ``parallel``: process-pool fitness evaluation and timing benchmark
- ``config``, ``train``, ``experiments``, ``cli``: run harness
"""

from .amt import MutationState, amt_update, tuning_multiplier
from .config import RunConfig, load_config, parse_config
from .envs import make_env, run_episode
from .es import EvolutionStrategy, FitnessTable, es_update, rank_normalize
from .orchestrator import ESAC, ConfigError, ESACConfig, select_winners
from .parallel import ParallelEvaluator, measure_scaling, parallel_map_fitness
from .sac import SACAgent, SACConfig
from .train import random_baseline, train, validation_return

__version__ = "0.1.0"

__all__ = [
    "ESAC", "ESACConfig", "ConfigError", "EvolutionStrategy", "FitnessTable", "MutationState", "ParallelEvaluator",
    "RunConfig", "SACAgent", "SACConfig", "amt_update", "es_update", "load_config", "make_env", "measure_scaling",
    "parallel_map_fitness", "parse_config", "random_baseline", "rank_normalize", "run_episode", "select_winners",
    "train", "tuning_multiplier", "validation_return",
]

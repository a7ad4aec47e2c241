"""Policy networks shared by the ES population and the SAC actor.

A policy network maps an observation to ``2 * action_dim`` numbers: the
pre-squash action mean followed by the log standard deviation.  ES offspring
use the deterministic action ``tanh(mean)``; SAC samples around it.
"""

from __future__ import annotations

import numpy as np

from .envs import Env
from .nnet import NetSpec, forward, forward_layers, unflatten


def policy_spec(env: Env, hidden_dims=(64, 64)) -> NetSpec:
    return NetSpec(env.obs_dim, tuple(hidden_dims), 2 * env.action_dim, "relu", "linear")


def deterministic_action(params: np.ndarray, spec: NetSpec, obs) -> np.ndarray:
    out = forward(params, spec, obs)
    return np.tanh(out[..., : spec.output_dim // 2])


class DeterministicPolicy:
    """Callable observation -> action for a fixed parameter vector.

    With ``memoize=True`` actions are cached per observation, which is exact
    for a deterministic policy and only worthwhile on finite observation sets.
    """

    def __init__(self, params: np.ndarray, spec: NetSpec, memoize: bool = False):
        self.params = params
        self.spec = spec
        self._layers = unflatten(params, spec)
        self._k = spec.output_dim // 2
        self._cache: dict[bytes, np.ndarray] | None = {} if memoize else None

    def __call__(self, obs: np.ndarray) -> np.ndarray:
        if self._cache is None:
            return self._act(obs)
        key = obs.tobytes()
        action = self._cache.get(key)
        if action is None:
            action = self._cache[key] = self._act(obs)
        return action

    def _act(self, obs: np.ndarray) -> np.ndarray:
        return np.tanh(forward_layers(self._layers, self.spec, obs)[: self._k])

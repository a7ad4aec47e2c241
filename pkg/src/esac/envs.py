"""Built-in episodic environments.

All environments are functional: ``step`` takes the current ``EnvState`` and
returns a ``StepResult`` carrying the next state, so one instance can be shared
by sequential episodes without hidden mutable state.  Continuous environments
accept actions in ``[-1, 1]^action_dim`` and rescale internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class EnvUsageError(RuntimeError):
    """Raised when stepping a finished episode or passing a malformed action."""


@dataclass(slots=True)
class EnvState:
    observation: np.ndarray
    step_index: int = 0
    done: bool = False


@dataclass(slots=True)
class StepResult:
    state: EnvState
    reward: float
    terminated: bool  # true termination, as opposed to hitting the horizon

    @property
    def next_observation(self) -> np.ndarray:
        return self.state.observation

    @property
    def done(self) -> bool:
        return self.state.done


class Env:
    name: str = ""
    obs_dim: int
    action_dim: int
    horizon: int
    reward_range: tuple[float, float]
    # A finite observation set lets deterministic policies be memoized per observation.
    finite_observations: bool = False

    def reset(self, seed: int) -> EnvState:
        raise NotImplementedError

    def _transition(self, obs: np.ndarray, action) -> tuple[np.ndarray, float, bool]:
        raise NotImplementedError

    def step(self, state: EnvState, action) -> StepResult:
        if state.done:
            raise EnvUsageError(f"{self.name}: step() called on a finished episode")
        obs, reward, terminated = self._transition(state.observation, action)
        t = state.step_index + 1
        next_state = EnvState(obs, t, terminated or t >= self.horizon)
        return StepResult(next_state, float(reward), terminated)

    def return_range(self) -> tuple[float, float]:
        """Bounds on the undiscounted episodic return."""
        lo, hi = self.reward_range
        return self.horizon * lo, self.horizon * hi

    def _continuous_action(self, action) -> np.ndarray:
        a = np.asarray(action, dtype=float).reshape(-1)
        if a.shape[0] != self.action_dim or not np.all(np.isfinite(a)):
            raise EnvUsageError(f"{self.name}: expected finite action of length {self.action_dim}")
        return np.clip(a, -1.0, 1.0)


class CyclicMDP(Env):
    """Three states on a cycle; only the clockwise move is rewarded.

    Actions: 0 clockwise, 1 anticlockwise, 2 stay.  A length-3 real vector is
    mapped to its argmax.  Any non-clockwise move yields -1 and ends the episode.
    """

    name = "cyclic-mdp"
    obs_dim = 3
    action_dim = 3
    reward_range = (-1.0, 1.0)
    finite_observations = True
    CLOCKWISE, ANTICLOCKWISE, STAY = 0, 1, 2

    def __init__(self, horizon: int = 2000):
        self.horizon = horizon
        self._states = [np.eye(3)[i] for i in range(3)]
        for s in self._states:
            s.flags.writeable = False

    def reset(self, seed: int = 0) -> EnvState:
        return EnvState(self._states[0])

    def return_range(self) -> tuple[float, float]:
        return -1.0, float(self.horizon)

    def _transition(self, obs, action):
        if np.ndim(action) == 0:
            a = int(action)
            if a not in (0, 1, 2):
                raise EnvUsageError(f"cyclic-mdp: invalid action {action!r}")
        else:
            vec = np.asarray(action, dtype=float).reshape(-1)
            if vec.shape[0] != 3:
                raise EnvUsageError("cyclic-mdp: action vector must have length 3")
            a = int(np.argmax(vec))
        s = 0 if obs[0] == 1.0 else (1 if obs[1] == 1.0 else 2)
        if a == self.CLOCKWISE:
            return self._states[(s + 1) % 3], 1.0, False
        s_next = (s - 1) % 3 if a == self.ANTICLOCKWISE else s
        return self._states[s_next], -1.0, True


class Pendulum(Env):
    """Torque-limited pendulum swing-up; observation (cos th, sin th, thdot)."""

    name = "pendulum"
    obs_dim = 3
    action_dim = 1
    max_speed = 8.0
    max_torque = 2.0
    dt = 0.05
    g = 10.0
    m = 1.0
    l = 1.0
    init_angle = math.pi
    init_speed = 1.0
    reward_range = (-(math.pi**2 + 0.1 * 8.0**2 + 0.001 * 2.0**2), 0.0)

    def __init__(self, horizon: int = 200):
        self.horizon = horizon

    def reset(self, seed: int = 0) -> EnvState:
        rng = np.random.default_rng(seed)
        th = rng.uniform(-self.init_angle, self.init_angle)
        thdot = rng.uniform(-self.init_speed, self.init_speed)
        return EnvState(np.array([math.cos(th), math.sin(th), thdot]))

    def _transition(self, obs, action):
        u = np.asarray(action, dtype=float).reshape(-1)
        if u.shape[0] != 1:
            raise EnvUsageError("pendulum: expected an action of length 1")
        u = float(u[0])
        if not math.isfinite(u):
            raise EnvUsageError("pendulum: non-finite action")
        u = self.max_torque * min(max(u, -1.0), 1.0)
        th = math.atan2(obs[1], obs[0])
        thdot = float(obs[2])
        cost = th**2 + 0.1 * thdot**2 + 0.001 * u**2
        thdot = thdot + (3 * self.g / (2 * self.l) * math.sin(th) + 3.0 / (self.m * self.l**2) * u) * self.dt
        thdot = min(max(thdot, -self.max_speed), self.max_speed)
        th = th + thdot * self.dt
        return np.array([math.cos(th), math.sin(th), thdot]), -cost, False


class PointMassSparse(Env):
    """2-D point mass pushed toward a goal at the origin; reward 1 only inside the goal disc."""

    name = "pointmass-sparse"
    obs_dim = 4
    action_dim = 2
    reward_range = (0.0, 1.0)
    goal_radius = 0.1
    start_radius = (0.3, 0.6)
    dt = 0.1
    max_speed = 1.0

    def __init__(self, horizon: int = 300):
        self.horizon = horizon

    def reset(self, seed: int = 0) -> EnvState:
        rng = np.random.default_rng(seed)
        r = rng.uniform(*self.start_radius)
        phi = rng.uniform(0.0, 2 * math.pi)
        return EnvState(np.array([r * math.cos(phi), r * math.sin(phi), 0.0, 0.0]))

    def _transition(self, obs, action):
        a = self._continuous_action(action)
        vel = np.clip(obs[2:] + self.dt * a, -self.max_speed, self.max_speed)
        pos = np.clip(obs[:2] + self.dt * vel, -1.0, 1.0)
        reward = 1.0 if math.hypot(pos[0], pos[1]) < self.goal_radius else 0.0
        return np.concatenate([pos, vel]), reward, False


ENVIRONMENTS: dict[str, type[Env]] = {
    CyclicMDP.name: CyclicMDP,
    Pendulum.name: Pendulum,
    PointMassSparse.name: PointMassSparse,
}


def make_env(name: str) -> Env:
    try:
        return ENVIRONMENTS[name]()
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None


def run_episode(env: Env, policy: Callable[[np.ndarray], object], seed: int) -> tuple[float, int]:
    """Roll out ``policy`` for one episode; returns (undiscounted return, length)."""
    state = env.reset(seed)
    total = 0.0
    while not state.done:
        result = env.step(state, policy(state.observation))
        total += result.reward
        state = result.state
    return total, state.step_index

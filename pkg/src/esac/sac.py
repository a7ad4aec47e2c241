"""Soft Actor-Critic with a state-value network, twin Q functions and a Polyak target.

Gradients are computed by hand through ``nnet.backward``.  The temperature
(``SACConfig.temperature``) is fixed and is the only place the entropy weight
enters: the value target and the policy loss both read it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .envs import Env
from .nnet import AdamState, NetSpec, adam_step, backward, forward, init_params
from .policies import policy_spec

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass
class SACConfig:
    gamma: float = 0.99
    temperature: float = 0.2
    tau: float = 0.005
    lr: float = 3e-4
    batch_size: int = 128
    buffer_capacity: int = 100_000
    log_std_min: float = -20.0
    log_std_max: float = 2.0

    def validate(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("sac.gamma must be in (0, 1)")
        if self.temperature < 0:
            raise ValueError("sac.temperature must be >= 0")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("sac.tau must be in (0, 1]")
        if self.lr < 0:
            raise ValueError("sac.lr must be >= 0")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need 1 <= sac.batch_size <= sac.buffer_capacity")


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool  # terminal for bootstrapping purposes; horizon cut-offs are not terminal


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return self.obs.shape[0]

    @classmethod
    def from_transitions(cls, transitions: list[Transition]) -> "Batch":
        return cls(
            np.array([t.obs for t in transitions], dtype=float),
            np.array([t.action for t in transitions], dtype=float),
            np.array([t.reward for t in transitions], dtype=float),
            np.array([t.next_obs for t in transitions], dtype=float),
            np.array([float(t.done) for t in transitions]),
        )


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is overwritten first."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def add(self, t: Transition) -> None:
        i = self._next
        self.obs[i], self.actions[i], self.rewards[i] = t.obs, t.action, t.reward
        self.next_obs[i], self.dones[i] = t.next_obs, float(t.done)
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, rng: np.random.Generator, batch_size: int) -> np.ndarray:
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, size=batch_size)

    def sample(self, rng: np.random.Generator, batch_size: int) -> Batch:
        idx = self.sample_indices(rng, batch_size)
        return Batch(self.obs[idx], self.actions[idx], self.rewards[idx], self.next_obs[idx], self.dones[idx])


@dataclass(frozen=True)
class SACSpecs:
    policy: NetSpec
    q: NetSpec
    value: NetSpec
    log_std_min: float = -20.0
    log_std_max: float = 2.0

    @property
    def action_dim(self) -> int:
        return self.policy.output_dim // 2

    @classmethod
    def for_env(cls, env: Env, hidden_dims=(64, 64), log_std_min=-20.0, log_std_max=2.0) -> "SACSpecs":
        hidden = tuple(hidden_dims)
        return cls(
            policy_spec(env, hidden),
            NetSpec(env.obs_dim + env.action_dim, hidden, 1, "relu", "linear"),
            NetSpec(env.obs_dim, hidden, 1, "relu", "linear"),
            log_std_min,
            log_std_max,
        )


@dataclass
class _Squashed:
    action: np.ndarray
    log_prob: np.ndarray
    pre_tanh: np.ndarray
    std: np.ndarray
    xi: np.ndarray
    log_std_live: np.ndarray  # 1 where the log-std clamp is inactive


def _log1m_tanh2(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), stable for large |u|."""
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def _squash(out: np.ndarray, xi: np.ndarray, specs: SACSpecs) -> _Squashed:
    k = specs.action_dim
    mean, raw_log_std = out[..., :k], out[..., k:]
    log_std = np.clip(raw_log_std, specs.log_std_min, specs.log_std_max)
    live = ((raw_log_std >= specs.log_std_min) & (raw_log_std <= specs.log_std_max)).astype(float)
    std = np.exp(log_std)
    u = mean + std * xi
    a = np.tanh(u)
    log_prob = np.sum(-0.5 * xi * xi - log_std - LOG_SQRT_2PI - _log1m_tanh2(u), axis=-1)
    return _Squashed(a, log_prob, u, std, xi, live)


def policy_sample(theta: np.ndarray, specs: SACSpecs, obs, rng: np.random.Generator | None = None,
                  xi=None, deterministic: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Tanh-squashed Gaussian action and its log density.

    Exactly one source of noise is used: explicit ``xi``, a draw from ``rng``,
    or none at all when ``deterministic`` (action ``tanh(mean)``).
    """
    out = forward(theta, specs.policy, obs)
    shape = out.shape[:-1] + (specs.action_dim,)
    if deterministic:
        xi = np.zeros(shape)
    elif xi is None:
        xi = rng.standard_normal(shape)
    sq = _squash(out, np.asarray(xi, dtype=float), specs)
    return sq.action, sq.log_prob


def _q_input(obs: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.concatenate([obs, actions], axis=-1)


def _check_batch(batch: Batch) -> None:
    if len(batch) == 0:
        raise ValueError("empty batch")


def compute_value_loss(psi, theta, phi1, phi2, batch: Batch, specs: SACSpecs, temperature: float,
                       xi: np.ndarray) -> tuple[float, np.ndarray]:
    """0.5 * mean (V(s) - [min_i Q_i(s, a~pi) - temperature * log pi(a|s)])^2 and its psi-gradient."""
    _check_batch(batch)
    action, log_prob = policy_sample(theta, specs, batch.obs, xi=xi)
    qin = _q_input(batch.obs, action)
    q_min = np.minimum(forward(phi1, specs.q, qin), forward(phi2, specs.q, qin))[:, 0]
    target = q_min - temperature * log_prob
    v = forward(psi, specs.value, batch.obs)[:, 0]
    diff = v - target
    b = len(batch)
    grad, _ = backward(psi, specs.value, batch.obs, (diff / b)[:, None])
    return float(0.5 * np.mean(diff * diff)), grad


def q_targets(psi_target, batch: Batch, specs: SACSpecs, gamma: float) -> np.ndarray:
    v_next = forward(psi_target, specs.value, batch.next_obs)[:, 0]
    return batch.rewards + gamma * (1.0 - batch.dones) * v_next


def compute_q_loss(phi, psi_target, batch: Batch, specs: SACSpecs, gamma: float,
                   targets: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """0.5 * mean (Q(s, a) - (r + gamma (1 - done) V_target(s')))^2 and its phi-gradient."""
    _check_batch(batch)
    if targets is None:
        targets = q_targets(psi_target, batch, specs, gamma)
    qin = _q_input(batch.obs, batch.actions)
    diff = forward(phi, specs.q, qin)[:, 0] - targets
    grad, _ = backward(phi, specs.q, qin, (diff / len(batch))[:, None])
    return float(0.5 * np.mean(diff * diff)), grad


def compute_policy_loss(theta, phi1, phi2, batch: Batch, specs: SACSpecs, temperature: float,
                        xi: np.ndarray) -> tuple[float, np.ndarray]:
    """mean(temperature * log pi(a|s) - min_i Q_i(s, a)) with reparameterized a; theta-gradient only."""
    _check_batch(batch)
    k = specs.action_dim
    out = forward(theta, specs.policy, batch.obs)
    sq = _squash(out, xi, specs)
    qin = _q_input(batch.obs, sq.action)
    q1 = forward(phi1, specs.q, qin)[:, 0]
    q2 = forward(phi2, specs.q, qin)[:, 0]
    use1 = q1 <= q2
    q_min = np.where(use1, q1, q2)
    b = len(batch)
    ones = np.ones((b, 1))
    _, gin1 = backward(phi1, specs.q, qin, ones)
    _, gin2 = backward(phi2, specs.q, qin, ones)
    dq_da = np.where(use1[:, None], gin1[:, -k:], gin2[:, -k:])

    # d/du of log pi is 2 tanh(u); d/dlog_std picks up -1 from the Gaussian normalizer.
    dq_du = dq_da * (1.0 - sq.action**2)
    dlogp_du = 2.0 * sq.action
    du_dls = sq.std * sq.xi
    d_mean = temperature * dlogp_du - dq_du
    d_log_std = (temperature * (dlogp_du * du_dls - 1.0) - dq_du * du_dls) * sq.log_std_live
    upstream = np.concatenate([d_mean, d_log_std], axis=1) / b
    grad, _ = backward(theta, specs.policy, batch.obs, upstream)
    return float(np.mean(temperature * sq.log_prob - q_min)), grad


def target_update(psi_target: np.ndarray, psi: np.ndarray, tau: float) -> np.ndarray:
    """Polyak average tau * psi + (1 - tau) * psi_target."""
    if psi_target.shape != psi.shape:
        raise ValueError("target and online parameter shapes differ")
    return tau * psi + (1.0 - tau) * psi_target


@dataclass
class SACMetrics:
    value_loss: float = float("nan")
    q1_loss: float = float("nan")
    q2_loss: float = float("nan")
    policy_loss: float = float("nan")
    update_count: int = 0
    skipped: bool = False


@dataclass
class SACAgent:
    """Parameters, optimizer states and replay buffer of one SAC learner."""

    specs: SACSpecs
    config: SACConfig
    theta: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    psi: np.ndarray
    psi_target: np.ndarray
    rng: np.random.Generator
    buffer: ReplayBuffer
    adam: dict[str, AdamState] = field(default_factory=dict)
    update_count: int = 0
    env_steps: int = 0

    @classmethod
    def create(cls, env: Env, config: SACConfig, seed: int, hidden_dims=(64, 64),
               theta: np.ndarray | None = None) -> "SACAgent":
        config.validate()
        specs = SACSpecs.for_env(env, hidden_dims, config.log_std_min, config.log_std_max)
        init = lambda spec, k: init_params(spec, seeding.derive_rng(seed, seeding.INIT, k))  # noqa: E731
        psi = init(specs.value, 3)
        agent = cls(
            specs, config,
            theta=init(specs.policy, 0) if theta is None else theta.copy(),
            phi1=init(specs.q, 1), phi2=init(specs.q, 2), psi=psi, psi_target=psi.copy(),
            rng=seeding.derive_rng(seed, seeding.SAC),
            buffer=ReplayBuffer(config.buffer_capacity, env.obs_dim, env.action_dim),
        )
        for name in ("theta", "phi1", "phi2", "psi"):
            agent.adam[name] = AdamState.zeros(getattr(agent, name).shape[0])
        return agent

    def act(self, obs, deterministic: bool = False) -> np.ndarray:
        action, _ = policy_sample(self.theta, self.specs, obs, rng=self.rng, deterministic=deterministic)
        return action

    def _step(self, name: str, grad: np.ndarray) -> None:
        if self.config.lr > 0:
            adam_step(getattr(self, name), grad, self.adam[name], self.config.lr)

    def update(self) -> SACMetrics:
        """One gradient step on value, both Q functions and the policy, then the target."""
        cfg = self.config
        if self.buffer.size < cfg.batch_size:
            return SACMetrics(update_count=self.update_count, skipped=True)
        batch = self.buffer.sample(self.rng, cfg.batch_size)
        k = self.specs.action_dim
        xi_v = self.rng.standard_normal((cfg.batch_size, k))
        xi_pi = self.rng.standard_normal((cfg.batch_size, k))

        v_loss, g = compute_value_loss(self.psi, self.theta, self.phi1, self.phi2, batch, self.specs,
                                       cfg.temperature, xi_v)
        self._step("psi", g)
        targets = q_targets(self.psi_target, batch, self.specs, cfg.gamma)
        q1_loss, g1 = compute_q_loss(self.phi1, self.psi_target, batch, self.specs, cfg.gamma, targets)
        q2_loss, g2 = compute_q_loss(self.phi2, self.psi_target, batch, self.specs, cfg.gamma, targets)
        self._step("phi1", g1)
        self._step("phi2", g2)
        pi_loss, gp = compute_policy_loss(self.theta, self.phi1, self.phi2, batch, self.specs,
                                          cfg.temperature, xi_pi)
        self._step("theta", gp)
        self.psi_target[:] = target_update(self.psi_target, self.psi, cfg.tau)
        self.update_count += 1
        return SACMetrics(v_loss, q1_loss, q2_loss, pi_loss, self.update_count)

    def collect_episode(self, env: Env, seed: int) -> tuple[float, int]:
        """One stochastic-policy episode; every transition goes to the replay buffer."""
        state = env.reset(seed)
        total = 0.0
        while not state.done:
            action = self.act(state.observation)
            res = env.step(state, action)
            self.buffer.add(Transition(state.observation, action, res.reward, res.next_observation,
                                       res.terminated))
            total += res.reward
            state = res.state
        self.env_steps += state.step_index
        return total, state.step_index

"""Evolution Strategies: Gaussian weight perturbations, centered-rank fitness, plain ES update."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import seeding
from .envs import make_env
from .nnet import NetSpec, init_params
from .parallel import EvalTask, ParallelEvaluator
from .policies import policy_spec


def sample_perturbations(seed: int, generation: int, n: int, dim: int, start: int = 0) -> np.ndarray:
    """``(n, dim)`` standard normal rows; row ``k`` is keyed by offspring index ``start + k``."""
    if n < 0 or dim < 1:
        raise ValueError("need n >= 0 and dim >= 1")
    out = np.empty((n, dim))
    for k in range(n):
        out[k] = seeding.derive_rng(seed, seeding.PERTURB, generation, start + k).standard_normal(dim)
    return out


@dataclass
class Population:
    """Offspring parameter vectors and the noise each one represents relative to ``base``.

    Freshly mutated members satisfy ``members[i] = base + sigma * noise[i]``.
    Injected members (fixed candidates) carry the implied noise
    ``(members[i] - base) / sigma``, shrunk if needed to the expected norm
    ``sqrt(dim)`` of a Gaussian draw, so they enter the ES update like any other
    member without one distant candidate dominating the step.
    """

    base: np.ndarray
    members: np.ndarray
    noise: np.ndarray
    sigma: float
    injected: int = 0

    @property
    def size(self) -> int:
        return self.members.shape[0]

    # the Gaussian draws epsilon_i
    @property
    def perturbations(self) -> np.ndarray:
        return self.noise


def make_population(base: np.ndarray, sigma: float, seed: int, generation: int, n: int,
                    injected=(), alpha_es: float | None = None) -> Population:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    injected = [np.asarray(p, dtype=float) for p in injected]
    k = len(injected)
    if n < 2 or k > n:
        raise ValueError(f"population of {n} cannot hold {k} injected members (need n >= 2)")
    noise = np.empty((n, base.shape[0]))
    noise[k:] = sample_perturbations(seed, generation, n - k, base.shape[0], start=k)
    members = np.empty_like(noise)
    members[k:] = base + sigma * noise[k:]
    # Cap so that alpha_es / (n sigma) * |score| * noise never exceeds |score| * (p - base).
    inv = 1.0 / sigma if alpha_es is None else min(1.0 / sigma, n * sigma / alpha_es)
    for i, p in enumerate(injected):
        members[i] = p
        noise[i] = (p - base) * inv
    return Population(base.copy(), members, noise, sigma, k)


def episode_seeds(seed: int, generation: int, index: int, episodes: int) -> tuple[int, ...]:
    return tuple(seeding.derive_seed(seed, seeding.EPISODE, generation, index, k) for k in range(episodes))


def evaluate_population(pop: Population, env_name: str, spec: NetSpec, evaluator: ParallelEvaluator,
                        seed: int, generation: int, episodes_per_offspring: int = 1,
                        memoize: bool = True) -> tuple[np.ndarray, int]:
    """Mean deterministic-policy return for every member, plus total environment steps."""
    tasks = [
        EvalTask(i, pop.members[i], env_name, episode_seeds(seed, generation, i, episodes_per_offspring),
                 spec, memoize)
        for i in range(pop.size)
    ]
    results = evaluator.map(tasks)
    return np.array([r.mean_return for r in results]), sum(r.steps for r in results)


def rank_normalize(raw) -> np.ndarray:
    """Centered ranks in [-0.5, 0.5]; equal values are ranked by index (lower index lower rank)."""
    raw = np.asarray(raw, dtype=float)
    n = raw.shape[0]
    if n < 2:
        raise ValueError("rank normalization needs at least two values")
    order = np.lexsort((np.arange(n), raw))
    ranks = np.empty(n)
    ranks[order] = np.arange(n)
    return ranks / (n - 1) - 0.5


def descending_order(raw) -> np.ndarray:
    """Indices sorted by return, best first; ties keep index order."""
    raw = np.asarray(raw, dtype=float)
    return np.lexsort((np.arange(raw.shape[0]), -raw))


@dataclass(frozen=True)
class FitnessTable:
    raw: np.ndarray
    normalized: np.ndarray
    order: np.ndarray

    @classmethod
    def from_returns(cls, raw) -> "FitnessTable":
        raw = np.asarray(raw, dtype=float)
        return cls(raw, rank_normalize(raw), descending_order(raw))


def es_update(theta: np.ndarray, scores, noise: np.ndarray, alpha_es: float, sigma: float) -> np.ndarray:
    """theta + alpha_es / (n sigma) * sum_i scores_i * noise_i, returned as a new array."""
    scores = np.asarray(scores, dtype=float)
    n = scores.shape[0]
    if sigma == 0:
        raise ZeroDivisionError("ES update with sigma = 0")
    if noise.shape != (n, theta.shape[0]):
        raise ValueError(f"noise shape {noise.shape} does not match {n} scores and dim {theta.shape[0]}")
    return theta + alpha_es / (n * sigma) * (scores @ noise)


def solved_cyclic_params(spec: NetSpec, seed: int = 0) -> np.ndarray:
    """Policy parameters that pick 'clockwise' in every cyclic-mdp state."""
    params = init_params(spec, seeding.derive_rng(seed, seeding.INIT, 99))
    w, b, _ = spec._slices[-1]
    params[w] = 0.0
    params[b] = 0.0
    params[b.start : b.start + 3] = [1.0, -1.0, -1.0]
    return params


class EvolutionStrategy:
    """Plain ES loop over a policy network; one ``step`` is one generation."""

    def __init__(self, env_name: str, n: int = 50, sigma: float = 5e-3, alpha_es: float = 5e-3,
                 seed: int = 0, hidden_dims=(64, 64), episodes_per_offspring: int = 1,
                 evaluator: ParallelEvaluator | None = None, memoize: bool = True):
        self.env_name = env_name
        self.env = make_env(env_name)
        self.spec = policy_spec(self.env, hidden_dims)
        self.n, self.sigma, self.alpha_es, self.seed = n, sigma, alpha_es, seed
        self.episodes_per_offspring = episodes_per_offspring
        self.evaluator = evaluator or ParallelEvaluator(1)
        self.memoize = memoize
        self.theta = init_params(self.spec, seeding.derive_rng(seed, seeding.INIT, 0))
        self.generation = 0
        self.env_steps = 0
        self.last_table: FitnessTable | None = None
        self.last_population: Population | None = None

    def step(self) -> dict:
        t0 = time.perf_counter()
        self.generation += 1
        pop = make_population(self.theta, self.sigma, self.seed, self.generation, self.n)
        raw, steps = evaluate_population(pop, self.env_name, self.spec, self.evaluator, self.seed,
                                         self.generation, self.episodes_per_offspring, self.memoize)
        table = FitnessTable.from_returns(raw)
        self.theta = es_update(self.theta, table.normalized, pop.noise, self.alpha_es, self.sigma)
        self.env_steps += steps
        self.last_table, self.last_population = table, pop
        return {
            "generation": self.generation,
            "best": float(raw.max()),
            "mean": float(raw.mean()),
            "std": float(raw.std()),
            "sigma": self.sigma,
            "env_steps": self.env_steps,
            "wall_s": time.perf_counter() - t0,
        }

"""Deterministic process-pool evaluation of population fitness, and its timing benchmark."""

from __future__ import annotations

import csv
import multiprocessing as mp
import time
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .envs import Env, make_env, run_episode
from .nnet import NetSpec
from .policies import DeterministicPolicy


class EvaluationError(RuntimeError):
    """A fitness evaluation failed; the message names the offspring index."""

    def __init__(self, index: int, detail: str):
        super().__init__(f"evaluation of offspring {index} failed:\n{detail}")
        self.index = index


@dataclass(frozen=True)
class EvalTask:
    index: int
    params: np.ndarray
    env_name: str
    seeds: tuple[int, ...]  # one per episode
    spec: NetSpec
    memoize: bool = True


@dataclass(frozen=True)
class EvalResult:
    index: int
    mean_return: float
    steps: int


_ENV_CACHE: dict[str, Env] = {}


def _env(name: str) -> Env:
    env = _ENV_CACHE.get(name)
    if env is None:
        env = _ENV_CACHE[name] = make_env(name)
    return env


def evaluate_task(task: EvalTask) -> EvalResult:
    env = _env(task.env_name)
    policy = DeterministicPolicy(task.params, task.spec, memoize=task.memoize and env.finite_observations)
    total, steps = 0.0, 0
    for seed in task.seeds:
        ret, length = run_episode(env, policy, seed)
        total += ret
        steps += length
    return EvalResult(task.index, total / len(task.seeds), steps)


def _guarded(task: EvalTask):
    try:
        return evaluate_task(task)
    except Exception:
        return task.index, traceback.format_exc()


def _unwrap(results) -> list[EvalResult]:
    for r in results:
        if not isinstance(r, EvalResult):
            raise EvaluationError(*r)
    return list(results)


class ParallelEvaluator:
    """Fixed-size worker pool; ``worker_count == 1`` evaluates in-process.

    Results come back in task order and are bitwise independent of the worker
    count because every task carries its own episode seeds.
    """

    def __init__(self, worker_count: int = 1):
        if worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        self.worker_count = worker_count
        self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def map(self, tasks: list[EvalTask]) -> list[EvalResult]:
        if not tasks:
            return []
        if self.worker_count == 1:
            return _unwrap([_guarded(t) for t in tasks])
        if self._pool is None:
            ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
            self._pool = ctx.Pool(self.worker_count)
        chunk = max(1, len(tasks) // (4 * self.worker_count))
        return _unwrap(self._pool.map(_guarded, tasks, chunksize=chunk))


def parallel_map_fitness(tasks: list[EvalTask], worker_count: int = 1) -> list[float]:
    """Mean episodic return per task, in task order."""
    with ParallelEvaluator(worker_count) as ev:
        return [r.mean_return for r in ev.map(tasks)]


@dataclass(frozen=True)
class TimingSample:
    worker_count: int
    population: int
    mean_s: float
    std_s: float
    samples: int
    mean_episode_s: float


def measure_scaling(
    env_name: str = "cyclic-mdp",
    worker_counts=(1, 2, 4),
    population_sizes=(50,),
    generations: int = 20,
    warmup: int = 2,
    sigma: float = 5e-3,
    alpha_es: float = 5e-3,
    hidden_dims=(64, 64),
    seed: int = 0,
) -> list[TimingSample]:
    """Wall-clock per ES generation for every (worker_count, population) pair.

    Each cell runs ``warmup + generations`` generations of plain ES and times
    the last ``generations`` of them.  The population is warm-started from a
    base policy that already solves cyclic-mdp so every episode runs to the
    horizon; observation memoization is disabled so each step pays for a
    network forward pass.
    """
    from .es import EvolutionStrategy, solved_cyclic_params

    if not worker_counts or not population_sizes:
        raise ValueError("worker_counts and population_sizes must be nonempty")
    samples = []
    for n in population_sizes:
        for workers in worker_counts:
            with ParallelEvaluator(workers) as ev:
                es = EvolutionStrategy(
                    env_name, n=n, sigma=sigma, alpha_es=alpha_es, seed=seed,
                    hidden_dims=hidden_dims, evaluator=ev, memoize=False,
                )
                if env_name == "cyclic-mdp":
                    es.theta = solved_cyclic_params(es.spec, seed)
                times, episodes = [], 0
                for g in range(warmup + generations):
                    t0 = time.perf_counter()
                    es.step()
                    dt = time.perf_counter() - t0
                    if g >= warmup:
                        times.append(dt)
                        episodes += n * es.episodes_per_offspring
            arr = np.asarray(times)
            samples.append(
                TimingSample(workers, n, float(arr.mean()), float(arr.std(ddof=1) if arr.size > 1 else 0.0),
                             arr.size, float(arr.sum() / episodes))
            )
    return samples


TIMING_COLUMNS = ("worker_count", "population", "mean_s", "std_s", "samples", "mean_episode_s")


def write_timing_csv(samples: list[TimingSample], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMING_COLUMNS)
        for s in samples:
            w.writerow([s.worker_count, s.population, f"{s.mean_s:.6f}", f"{s.std_s:.6f}", s.samples,
                        f"{s.mean_episode_s:.6f}"])

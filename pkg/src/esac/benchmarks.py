"""Reproduction experiments as plain functions returning small result records.

The acceptance tests and the scripts in ``scripts/`` both call these, so the
numbers printed by a script are the numbers the tests assert on.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .config import RunConfig, load_config
from .envs import make_env
from .experiments import compare_updates, sweep
from .parallel import measure_scaling
from .train import RunResult, random_baseline, train


def packaged_config(name: str) -> RunConfig:
    """Load one of the experiment configs shipped in ``esac/configs/``."""
    with resources.as_file(resources.files("esac") / "configs" / f"{name}.cfg") as path:
        return load_config(path)


@dataclass
class CyclicResult:
    solved_at: list[int | None]  # first generation with validation +2000, per seed

    @property
    def successes(self) -> int:
        return sum(g is not None for g in self.solved_at)


def cyclic_es(seeds=(0, 1, 2), generations: int = 100, workers: int = 1) -> CyclicResult:
    """Plain ES on cyclic-mdp, validating every generation and stopping at the first +2000."""
    base = packaged_config("cyclic_es").replace(generations=generations, validate_every=1, workers=workers)
    solved = []
    for s in seeds:
        res = train(base.replace(seed=s), stop_when=lambda r: (r["validation"] or 0.0) >= 2000.0)
        hits = [g for g, v in res.validations if v >= 2000.0]
        solved.append(hits[0] if hits else None)
    return CyclicResult(solved)


@dataclass
class ScalingResult:
    one_worker_s: float
    many_workers_s: float
    workers: int
    cpu_count: int

    @property
    def ratio(self) -> float:
        return self.many_workers_s / self.one_worker_s


def scaling(workers: int = 4, generations: int = 20, population: int = 50) -> ScalingResult:
    samples = measure_scaling("cyclic-mdp", [1, workers], [population], generations=generations)
    return ScalingResult(samples[0].mean_s, samples[1].mean_s, workers, os.cpu_count() or 1)


@dataclass
class UpdateResult:
    env_steps: int
    esac_updates: int
    sac_updates: int

    @property
    def ratio(self) -> float:
        return self.esac_updates / self.sac_updates


def update_counts(cfg: RunConfig | None = None) -> UpdateResult:
    rows = compare_updates(cfg or packaged_config("compare_updates"))
    return UpdateResult(*rows[-1])


@dataclass
class ZetaResult:
    values: list[float]
    normalized: dict[float, list[float]]  # per value, one entry per seed

    def group_mean(self, lo: float, hi: float) -> float:
        vals = [x for v, xs in self.normalized.items() if lo <= v <= hi for x in xs]
        return float(np.mean(vals))


def zeta_sweep(values=(1e-4, 1e-3, 1e-2, 1e-1, 1.0), seeds=(0, 1, 2), cfg: RunConfig | None = None,
               progress=None) -> ZetaResult:
    rows = sweep(cfg or packaged_config("pendulum_esac"), "zeta", values, seeds, progress=progress)
    out: dict[float, list[float]] = {float(v): [] for v in values}
    for r in rows:
        out[r.value].append(r.normalized)
    return ZetaResult([float(v) for v in values], out)


@dataclass
class SanityResult:
    env: str
    baselines: dict[int, tuple[float, float]]  # seed -> (mean, std) of random-policy returns
    final_returns: dict[int, float]

    def threshold(self, seed: int) -> float:
        mean, std = self.baselines[seed]
        return mean + 3.0 * std

    @property
    def passes(self) -> int:
        return sum(self.final_returns[s] > self.threshold(s) for s in self.final_returns)


def esac_runs(config_name: str, seeds, workers: int = 1) -> dict[int, RunResult]:
    cfg = packaged_config(config_name).replace(workers=workers)
    return {s: train(cfg.replace(seed=s)) for s in seeds}


def learning_sanity(config_name: str, runs: dict[int, RunResult], baseline_episodes: int = 100) -> SanityResult:
    """Final validation return of each run against a random-action baseline from the same seed."""
    env = make_env(packaged_config(config_name).env)
    return SanityResult(env.name, {s: random_baseline(env, s, baseline_episodes) for s in runs},
                        {s: r.summary["final_validation"] for s, r in runs.items()})


def nondecreasing_fraction(values) -> float | None:
    """Share of consecutive pairs with ``b >= a``; None with fewer than two values."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return None
    return float(np.mean(v[1:] >= v[:-1]))


@dataclass
class WinnerResult:
    per_seed: dict[int, float | None]

    @property
    def mean_fraction(self) -> float:
        vals = [f for f in self.per_seed.values() if f is not None]
        return float(np.mean(vals)) if vals else float("nan")


def winner_improvement(runs: dict[int, RunResult], after: int = 20) -> WinnerResult:
    """Mean winner fitness at SAC-phase generations past ``after``, scored by :func:`nondecreasing_fraction`."""
    out = {}
    for seed, res in runs.items():
        series = [r["winner_mean"] for r in res.records if r["sac_phase_ran"] and r["generation"] > after]
        out[seed] = nondecreasing_fraction(series)
    return WinnerResult(out)


def with_esac(cfg: RunConfig, **changes) -> RunConfig:
    return cfg.replace(esac=dataclasses.replace(cfg.esac, **changes))

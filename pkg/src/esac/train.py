"""Training runners for ESAC, plain ES and plain SAC, with periodic validation and run artifacts.

Every run directory holds ``metrics.jsonl`` (one record per generation, or
per episode for SAC), ``summary.csv`` (one row) and ``checkpoints/``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import seeding
from .checkpoint import save_checkpoint
from .config import RunConfig
from .envs import Env, make_env, run_episode
from .es import EvolutionStrategy
from .nnet import NetSpec
from .orchestrator import ESAC, mean_losses
from .parallel import ParallelEvaluator
from .policies import DeterministicPolicy, policy_spec
from .sac import SACAgent, Transition

SUMMARY_COLUMNS = ("algorithm", "env", "seed", "generations", "episodes", "env_steps", "total_gradient_updates",
                   "best_validation", "final_validation", "wall_s", "completed")


def validation_seeds(seed: int, episodes: int) -> list[int]:
    # Same episodes at every validation point, so successive scores are comparable.
    return [seeding.derive_seed(seed, seeding.VALIDATION, j) for j in range(episodes)]


def validation_return(params: np.ndarray, spec: NetSpec, env: Env, seed: int, episodes: int = 10) -> float:
    """Mean return of the deterministic policy over the fixed validation episodes."""
    policy = DeterministicPolicy(params, spec, memoize=env.finite_observations)
    return float(np.mean([run_episode(env, policy, s)[0] for s in validation_seeds(seed, episodes)]))


def random_baseline(env: Env, seed: int, episodes: int = 100) -> tuple[float, float]:
    """Mean and standard deviation of per-episode returns under uniformly random actions."""
    rng = seeding.derive_rng(seed, seeding.BASELINE)
    if env.finite_observations:
        act = lambda obs: int(rng.integers(env.action_dim))  # noqa: E731
    else:
        act = lambda obs: rng.uniform(-1.0, 1.0, env.action_dim)  # noqa: E731
    returns = [run_episode(env, act, s)[0] for s in validation_seeds(seed, episodes)]
    return float(np.mean(returns)), float(np.std(returns))


@dataclass
class RunResult:
    records: list[dict]
    summary: dict
    out_dir: Path | None

    @property
    def validations(self) -> list[tuple[int, float]]:
        """(generation or episode, validation return) pairs in run order."""
        key = "episode" if self.summary["algorithm"] == "sac" else "generation"
        return [(r[key], r["validation"]) for r in self.records if r.get("validation") is not None]


class _Sink:
    """Line-buffered metrics writer; a no-op when ``out_dir`` is None."""

    def __init__(self, out_dir: Path | None):
        self.out_dir = out_dir
        self._fh = None
        if out_dir is not None:
            (out_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
            self._fh = open(out_dir / "metrics.jsonl", "w")

    def write(self, record: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._fh.flush()

    def checkpoint(self, tag: str, meta: dict, arrays) -> None:
        if self.out_dir is not None:
            save_checkpoint(self.out_dir / "checkpoints" / f"{tag}.ckpt", meta, arrays)

    def summary(self, row: dict) -> None:
        if self.out_dir is not None:
            with open(self.out_dir / "summary.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
                w.writeheader()
                w.writerow({k: row[k] for k in SUMMARY_COLUMNS})

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def _summary(cfg: RunConfig, records: list[dict], generations: int, episodes: int, env_steps: int, updates: int,
             wall: float, completed: bool) -> dict:
    vals = [r["validation"] for r in records if r.get("validation") is not None]
    return {
        "algorithm": cfg.algorithm, "env": cfg.env, "seed": cfg.seed, "generations": generations,
        "episodes": episodes, "env_steps": env_steps, "total_gradient_updates": updates,
        "best_validation": max(vals) if vals else None, "final_validation": vals[-1] if vals else None,
        "wall_s": round(wall, 3), "completed": completed,
    }


Callback = Callable[[dict], None]


def train(cfg: RunConfig, out_dir=None, evaluator: ParallelEvaluator | None = None,
          on_record: Callback | None = None, stop_when: Callable[[dict], bool] | None = None) -> RunResult:
    """Run ``cfg.algorithm`` to budget.

    ``stop_when`` is checked after every record and ends the run early when it
    returns true (used by tests that only need the first success).
    """
    cfg.validate()
    out = Path(out_dir) if out_dir is not None else None
    sink = _Sink(out)
    own_evaluator = evaluator is None
    evaluator = evaluator or ParallelEvaluator(cfg.workers)
    runner = _train_sac if cfg.algorithm == "sac" else _train_population
    try:
        records, summary = runner(cfg, sink, evaluator, on_record, stop_when)
    finally:
        sink.close()
        if own_evaluator:
            evaluator.close()
    return RunResult(records, summary, out)


def _train_population(cfg, sink, evaluator, on_record, stop_when):
    env = make_env(cfg.env)
    e = cfg.esac
    if cfg.algorithm == "esac":
        algo = ESAC(cfg.env, e, cfg.seed, evaluator)
        spec = algo.spec
    else:
        algo = EvolutionStrategy(cfg.env, e.population, e.sigma, e.alpha_es, cfg.seed, e.hidden_dims,
                                 e.episodes_per_offspring, evaluator)
        spec = algo.spec
    records: list[dict] = []
    t0 = time.perf_counter()
    completed = False
    gen = 0

    def state():
        if cfg.algorithm == "esac":
            return algo.best_params(), algo.theta_es, algo.env_steps, algo.episodes, algo.sac.update_count
        return algo.theta, algo.theta, algo.env_steps, gen * e.population * e.episodes_per_offspring, 0

    def checkpoint(tag):
        best, base, *_ = state()
        arrays = {"best": (best, spec), "theta_es": (base, spec)}
        if cfg.algorithm == "esac":
            s = algo.sac.specs
            arrays.update(sac_theta=(algo.sac.theta, s.policy), sac_phi1=(algo.sac.phi1, s.q),
                          sac_phi2=(algo.sac.phi2, s.q), sac_psi=(algo.sac.psi, s.value),
                          sac_psi_target=(algo.sac.psi_target, s.value))
        meta = {"algorithm": cfg.algorithm, "env": cfg.env, "seed": cfg.seed, "generation": gen, "sigma": e.sigma}
        if cfg.algorithm == "esac":
            meta.update(algo.state_meta())
        sink.checkpoint(tag, meta, arrays)

    try:
        for gen in range(1, cfg.generations + 1):
            if cfg.algorithm == "esac":
                rec = algo.run_generation().to_dict()
            else:
                rec = algo.step()
                rec.update(episodes=gen * e.population * e.episodes_per_offspring, total_gradient_updates=0,
                           validation=None)
            if gen % cfg.validate_every == 0 or gen == cfg.generations:
                rec["validation"] = validation_return(state()[0], spec, env, cfg.seed, cfg.validation_episodes)
            records.append(rec)
            sink.write(rec)
            if on_record:
                on_record(rec)
            if cfg.checkpoint_every and gen % cfg.checkpoint_every == 0:
                checkpoint(f"gen{gen:06d}")
            if stop_when and stop_when(rec):
                break
        completed = True
    finally:
        _, _, steps, episodes, updates = state()
        summary = _summary(cfg, records, gen if records else 0, episodes, steps, updates,
                           time.perf_counter() - t0, completed)
        sink.summary(summary)
        if records:
            checkpoint("final")
    return records, summary


def _train_sac(cfg, sink, evaluator, on_record, stop_when):
    """Plain SAC: one gradient update per environment step, up to ``cfg.env_steps`` steps."""
    env = make_env(cfg.env)
    agent = SACAgent.create(env, cfg.esac.sac, cfg.seed, cfg.esac.hidden_dims)
    spec = policy_spec(env, cfg.esac.hidden_dims)
    records: list[dict] = []
    t0 = time.perf_counter()
    episode = 0
    completed = False
    try:
        while agent.env_steps < cfg.env_steps:
            episode += 1
            state = env.reset(seeding.derive_seed(cfg.seed, seeding.SAC, 0, episode))
            total, metrics = 0.0, []
            while not state.done and agent.env_steps < cfg.env_steps:
                action = agent.act(state.observation)
                res = env.step(state, action)
                agent.buffer.add(Transition(state.observation, action, res.reward, res.next_observation,
                                            res.terminated))
                agent.env_steps += 1
                m = agent.update()
                if not m.skipped:
                    metrics.append(m)
                total += res.reward
                state = res.state
            rec = {"episode": episode, "return": total, "length": state.step_index, "env_steps": agent.env_steps,
                   "total_gradient_updates": agent.update_count, "losses": mean_losses(metrics),
                   "wall_s": time.perf_counter() - t0, "validation": None}
            if episode % cfg.validate_every == 0 or agent.env_steps >= cfg.env_steps:
                rec["validation"] = validation_return(agent.theta, spec, env, cfg.seed, cfg.validation_episodes)
            records.append(rec)
            sink.write(rec)
            if on_record:
                on_record(rec)
            if stop_when and stop_when(rec):
                break
        completed = True
    finally:
        summary = _summary(cfg, records, 0, episode, agent.env_steps, agent.update_count,
                           time.perf_counter() - t0, completed)
        sink.summary(summary)
        if records:
            s = agent.specs
            sink.checkpoint("final", {"algorithm": "sac", "env": cfg.env, "seed": cfg.seed, "episode": episode},
                            {"sac_theta": (agent.theta, s.policy), "sac_phi1": (agent.phi1, s.q),
                             "sac_phi2": (agent.phi2, s.q), "sac_psi": (agent.psi, s.value),
                             "sac_psi_target": (agent.psi_target, s.value)})
    return records, summary

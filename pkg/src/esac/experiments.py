"""Multi-run experiments: hyperparameter sweeps and the gradient-update comparison."""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .envs import make_env
from .orchestrator import ConfigError
from .parallel import ParallelEvaluator
from .train import train

SWEEP_PARAMETERS = {"zeta": "zeta", "sigma": "sigma"}
SWEEP_COLUMNS = ("value", "seed", "return", "normalized_return")
UPDATE_COLUMNS = ("env_steps", "esac_updates", "sac_updates")


@dataclass(frozen=True)
class SweepRow:
    value: float
    seed: int
    ret: float
    normalized: float


def normalize_returns(returns, lower: float) -> np.ndarray:
    """Map returns so that ``lower`` goes to 0 and the best return to 1.

    With ``lower = 0`` this is plain division by the best return; the shift
    keeps the ratio meaningful for environments whose returns are negative.
    """
    r = np.asarray(returns, dtype=float)
    span = r.max() - lower
    if span <= 0:
        return np.ones_like(r)
    return (r - lower) / span


def sweep(cfg: RunConfig, parameter: str, values, seeds, evaluator: ParallelEvaluator | None = None,
          progress=None) -> list[SweepRow]:
    """Final validation return for every (value, seed) pair, normalized across the whole sweep."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep parameter must be one of {sorted(SWEEP_PARAMETERS)}")
    values, seeds = [float(v) for v in values], [int(s) for s in seeds]
    if len(values) < 2:
        raise ConfigError("a sweep needs at least two values")
    if len(set(seeds)) < 3:
        raise ConfigError("a sweep needs at least three distinct seeds")
    if parameter == "zeta" and cfg.algorithm != "esac":
        raise ConfigError("zeta only affects algorithm = esac")
    if cfg.algorithm == "sac":
        raise ConfigError("sweeps run es or esac")
    if cfg.generations < 1:
        raise ConfigError("sweep runs need run.generations >= 1")
    results = []
    ev = evaluator or ParallelEvaluator(cfg.workers)
    try:
        for v in values:
            for s in seeds:
                esac_cfg = dataclasses.replace(cfg.esac, **{SWEEP_PARAMETERS[parameter]: v})
                ret = train(cfg.replace(seed=s, esac=esac_cfg), evaluator=ev).summary["final_validation"]
                results.append((v, s, ret))
                if progress:
                    progress(v, s, ret)
    finally:
        if evaluator is None:
            ev.close()
    lower = make_env(cfg.env).return_range()[0]
    norm = normalize_returns([r for _, _, r in results], lower)
    return [SweepRow(v, s, r, float(n)) for (v, s, r), n in zip(results, norm)]


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(r.value), r.seed, f"{r.ret:.6f}", f"{r.normalized:.6f}"])


def compare_updates(cfg: RunConfig, evaluator: ParallelEvaluator | None = None) -> list[tuple[int, int, int]]:
    """Cumulative gradient updates of ESAC and plain SAC at matched environment-step counts.

    ESAC runs ``cfg.generations`` generations; SAC then runs for exactly the
    environment steps ESAC consumed.  Each row pairs an ESAC generation
    boundary with SAC's count at its last episode boundary not past that step.
    """
    esac = train(cfg.replace(algorithm="esac"), evaluator=evaluator)
    marks = [(r["env_steps"], r["total_gradient_updates"]) for r in esac.records]
    if not marks:
        return []
    sac = train(cfg.replace(algorithm="sac", env_steps=marks[-1][0]))
    sac_marks = [(r["env_steps"], r["total_gradient_updates"]) for r in sac.records]
    rows, j, count = [], 0, 0
    for steps, esac_updates in marks:
        while j < len(sac_marks) and sac_marks[j][0] <= steps:
            count = sac_marks[j][1]
            j += 1
        rows.append((steps, esac_updates, count))
    return rows


def write_updates_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(UPDATE_COLUMNS)
        w.writerows(rows)


"""The ESAC generation loop: ES population, soft winners, gated SAC phase with AMT, hindsight crossovers."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import seeding
from .amt import MutationState, amt_update
from .envs import make_env
from .es import FitnessTable, Population, es_update, evaluate_population, make_population
from .nnet import init_params
from .parallel import ParallelEvaluator
from .policies import policy_spec
from .sac import SACAgent, SACConfig


class ConfigError(ValueError):
    """Invalid or inconsistent configuration value."""


@dataclass
class ESACConfig:
    population: int = 50
    winner_fraction: float = 0.4
    gradient_interval: int = 10
    p_sac_initial: float = 1.0
    p_sac_decay: float = 0.8
    sac_episodes_per_phase: int = 5
    crossover_swap_prob: float = 0.5
    episodes_per_offspring: int = 1
    sigma: float = 5e-3
    alpha_es: float = 5e-3
    zeta: float = 5e-3
    hidden_dims: tuple[int, ...] = (64, 64)
    sac: SACConfig = field(default_factory=SACConfig)

    @property
    def winners(self) -> int:
        return int(np.floor(self.population * self.winner_fraction + 1e-9))

    def validate(self) -> None:
        if self.population < 2:
            raise ConfigError("es.population must be >= 2")
        if not 0.0 < self.winner_fraction <= 1.0:
            raise ConfigError("es.winner_fraction must be in (0, 1]")
        if self.winners < 1:
            raise ConfigError("es.winner_fraction * es.population must be >= 1")
        if self.crossover_swap_prob > 0 and self.winners + 1 > self.population:
            raise ConfigError("es.winner_fraction leaves no room for the SAC member (need w + 1 <= n)")
        if self.gradient_interval < 1:
            raise ConfigError("esac.gradient_interval must be >= 1")
        if not 0.0 <= self.p_sac_initial <= 1.0:
            raise ConfigError("esac.p_sac_initial must be in [0, 1]")
        if not 0.0 < self.p_sac_decay < 1.0:
            raise ConfigError("esac.p_sac_decay must be in (0, 1)")
        if self.sac_episodes_per_phase < 1:
            raise ConfigError("esac.sac_episodes must be >= 1")
        if not 0.0 <= self.crossover_swap_prob <= 1.0:
            raise ConfigError("esac.swap_prob must be in [0, 1]")
        if self.episodes_per_offspring < 1:
            raise ConfigError("es.episodes_per_offspring must be >= 1")
        if self.sigma <= 0 or self.alpha_es <= 0 or self.zeta < 0:
            raise ConfigError("need es.sigma > 0, es.alpha > 0, amt.zeta >= 0")
        try:
            self.sac.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class WinnerSet:
    indices: np.ndarray
    params: np.ndarray  # (w, dim) perturbed member vectors, best first
    raw_returns: np.ndarray


def select_winners(table: FitnessTable, pop: Population, e: float) -> WinnerSet:
    """Top ``floor(n e)`` members by raw return, ties by index.  No member is shielded from mutation."""
    n = pop.size
    w = int(np.floor(n * e + 1e-9))
    if w < 1 or w > n:
        raise ConfigError(f"winner fraction {e} gives {w} winners for population {n}")
    idx = table.order[:w]
    return WinnerSet(idx.copy(), pop.members[idx].copy(), table.raw[idx].copy())


def should_run_sac(generation: int, g: int, p_sac: float, rng: np.random.Generator) -> bool:
    """Gradient-interval gate with a Uniform(0, 1) draw against ``p_sac``.

    The uniform draw happens only on eligible generations.
    """
    if g < 1:
        raise ConfigError("gradient interval must be >= 1")
    if generation % g != 0:
        return False
    return bool(rng.random() < p_sac)


def anneal_p_sac(p_sac_initial: float, decay: float, completed_phases: int) -> float:
    if not 0.0 < decay < 1.0:
        raise ConfigError("p_sac decay must be in (0, 1)")
    return p_sac_initial * decay**completed_phases


def hindsight_crossover(winner: np.ndarray, theta_es: np.ndarray, swap_prob: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Per-element uniform crossover: take the winner's element with probability ``swap_prob``."""
    if winner.shape != theta_es.shape:
        raise ValueError(f"crossover length mismatch: {winner.shape} vs {theta_es.shape}")
    mask = rng.random(theta_es.shape[0]) < swap_prob
    return np.where(mask, winner, theta_es)


def form_population(theta_sac: np.ndarray | None, crossed_winners: list[np.ndarray], n: int) -> list[np.ndarray]:
    """Fixed candidates for the next generation: the SAC policy first, then crossed winners.

    The rest of the population (``n - len(result)`` members) is freshly
    perturbed around the updated ES parameters by ``make_population``.
    """
    injected = ([theta_sac.copy()] if theta_sac is not None else []) + [c.copy() for c in crossed_winners]
    if len(injected) > n:
        raise ConfigError(f"{len(injected)} injected members do not fit a population of {n}")
    return injected


@dataclass
class GenerationRecord:
    generation: int
    episodes: int
    best: float
    mean: float
    std: float
    winner_mean: float
    sigma: float
    p_sac: float
    sac_phase_ran: bool
    gradient_updates: int
    total_gradient_updates: int
    env_steps: int
    wall_s: float
    sac_return: float | None = None
    losses: dict | None = None  # mean SAC losses over the phase
    validation: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


class ESAC:
    """Holds all run state; ``run_generation`` performs one full generation."""

    def __init__(self, env_name: str, config: ESACConfig | None = None, seed: int = 0,
                 evaluator: ParallelEvaluator | None = None, memoize: bool = True):
        self.config = config = config or ESACConfig()
        config.validate()
        self.env_name = env_name
        self.env = make_env(env_name)
        self.seed = seed
        self.spec = policy_spec(self.env, config.hidden_dims)
        self.evaluator = evaluator or ParallelEvaluator(1)
        self.memoize = memoize
        # Same stream as EvolutionStrategy so the two start from identical ES parameters.
        self.theta_es = init_params(self.spec, seeding.derive_rng(seed, seeding.INIT, 0))
        self.sac = SACAgent.create(self.env, config.sac, seed, config.hidden_dims)
        self.mutation = MutationState.create(config.sigma, config.zeta, config.alpha_es, config.population)
        self.generation = 0
        self.completed_phases = 0
        self.p_sac = config.p_sac_initial
        self.env_steps = 0
        self.episodes = 0
        self.injected: list[np.ndarray] = []
        self.last_table: FitnessTable | None = None
        self.last_population: Population | None = None
        self.last_winners: WinnerSet | None = None

    @property
    def sigma(self) -> float:
        return self.mutation.sigma

    def best_params(self) -> np.ndarray:
        """Best-ranked member of the most recent generation (ES parameters before the first one)."""
        if self.last_winners is None:
            return self.theta_es
        return self.last_winners.params[0]

    def run_generation(self) -> GenerationRecord:
        cfg = self.config
        t0 = time.perf_counter()
        self.generation += 1
        gen = self.generation
        sigma = self.mutation.sigma

        pop = make_population(self.theta_es, sigma, self.seed, gen, cfg.population, self.injected,
                              self.mutation.alpha_es)
        raw, steps = evaluate_population(pop, self.env_name, self.spec, self.evaluator, self.seed, gen,
                                         cfg.episodes_per_offspring, self.memoize)
        self.env_steps += steps
        self.episodes += pop.size * cfg.episodes_per_offspring
        table = FitnessTable.from_returns(raw)
        winners = select_winners(table, pop, cfg.winner_fraction)
        self.theta_es = es_update(self.theta_es, table.normalized, pop.noise, self.mutation.alpha_es, sigma)

        updates_before = self.sac.update_count
        p_sac_used = self.p_sac
        ran = should_run_sac(gen, cfg.gradient_interval, self.p_sac, seeding.derive_rng(self.seed, seeding.GATE, gen))
        sac_return, losses = None, None
        if ran:
            sac_return, losses = self._sac_phase(gen)
            amt_update(self.mutation, float(raw.max()), float(raw.mean()))
            self.completed_phases += 1
            self.p_sac = anneal_p_sac(cfg.p_sac_initial, cfg.p_sac_decay, self.completed_phases)

        crossed = []
        if cfg.crossover_swap_prob > 0:
            for k, params in enumerate(winners.params):
                rng = seeding.derive_rng(self.seed, seeding.CROSSOVER, gen, k)
                crossed.append(hindsight_crossover(params, self.theta_es, cfg.crossover_swap_prob, rng))
        theta_sac = self.sac.theta if self.completed_phases > 0 else None
        self.injected = form_population(theta_sac, crossed, cfg.population)

        self.last_table, self.last_population, self.last_winners = table, pop, winners
        return GenerationRecord(
            generation=gen,
            episodes=self.episodes,
            best=float(raw.max()),
            mean=float(raw.mean()),
            std=float(raw.std()),
            winner_mean=float(winners.raw_returns.mean()),
            sigma=self.mutation.sigma,
            p_sac=p_sac_used,
            sac_phase_ran=ran,
            gradient_updates=self.sac.update_count - updates_before,
            total_gradient_updates=self.sac.update_count,
            env_steps=self.env_steps,
            wall_s=time.perf_counter() - t0,
            sac_return=sac_return,
            losses=losses,
        )

    def _sac_phase(self, gen: int) -> tuple[float, dict | None]:
        """Collect SAC episodes, then one gradient step per collected environment step."""
        total, steps = 0.0, 0
        for k in range(self.config.sac_episodes_per_phase):
            ret, length = self.sac.collect_episode(self.env, seeding.derive_seed(self.seed, seeding.SAC, gen, k))
            total += ret
            steps += length
        self.env_steps += steps
        metrics = [m for m in (self.sac.update() for _ in range(steps)) if not m.skipped]
        return total / self.config.sac_episodes_per_phase, mean_losses(metrics)

    def state_meta(self) -> dict:
        """JSON-serializable run state that is not a parameter vector."""
        m = self.mutation
        return {
            "generation": self.generation, "completed_phases": self.completed_phases, "p_sac": self.p_sac,
            "env_steps": self.env_steps, "episodes": self.episodes,
            "mutation": {"sigma": m.sigma, "sigma_initial": m.sigma_initial, "zeta": m.zeta,
                         "history": [[h.r_max, h.r_avg, h.sigma, h.increment] for h in m.history]},
            "sac_rng": self.sac.rng.bit_generator.state, "sac_updates": self.sac.update_count,
            "replay_size": self.sac.buffer.size,
        }


def mean_losses(metrics) -> dict | None:
    if not metrics:
        return None
    names = ("value_loss", "q1_loss", "q2_loss", "policy_loss")
    return {n: float(np.mean([getattr(m, n) for m in metrics])) for n in names}

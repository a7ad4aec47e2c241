import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esac.es import EvolutionStrategy
from esac.orchestrator import (ESAC, ConfigError, ESACConfig, anneal_p_sac, form_population, hindsight_crossover,
                               should_run_sac)
from esac.parallel import ParallelEvaluator

SMALL = dict(population=6, hidden_dims=(8,), sac_episodes_per_phase=1)


def rng(k=0):
    return np.random.default_rng(k)


@given(st.integers(1, 1000), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_gate(generation, g, seed):
    r = np.random.default_rng(seed)
    assert not should_run_sac(generation, g, 0.0, r)
    assert should_run_sac(g * generation, g, 1.0, r)
    if g > 1 and generation % g:
        assert not should_run_sac(generation, g, 1.0, r)


def test_gate_consumes_no_randomness_off_interval():
    r = rng(1)
    should_run_sac(3, 2, 0.5, r)
    assert r.random() == rng(1).random()


def test_anneal():
    assert anneal_p_sac(0.7, 0.8, 0) == 0.7
    assert anneal_p_sac(1.0, 0.5, 3) == 0.125
    assert anneal_p_sac(1.0, 0.8, 500) < 1e-40
    with pytest.raises(ConfigError):
        anneal_p_sac(1.0, 1.0, 1)


def test_crossover_extremes_and_length():
    w, t = np.arange(5.0), -np.arange(5.0) - 1
    np.testing.assert_array_equal(hindsight_crossover(w, t, 0.0, rng()), t)
    np.testing.assert_array_equal(hindsight_crossover(w, t, 1.0, rng()), w)
    with pytest.raises(ValueError):
        hindsight_crossover(w, t[:3], 0.5, rng())


def test_crossover_mixing_fraction():
    w, t = np.ones(10_000), np.zeros(10_000)
    frac = hindsight_crossover(w, t, 0.5, rng(3)).mean()
    assert 0.47 <= frac <= 0.53


def test_form_population_counts():
    sac, crossed = np.zeros(3), [np.ones(3)]
    inj = form_population(sac, crossed, 2)
    assert len(inj) == 2 and inj[0] is not sac
    assert form_population(None, crossed, 2)[0].tolist() == [1.0, 1.0, 1.0]
    with pytest.raises(ConfigError):
        form_population(sac, [np.ones(3)] * 2, 2)


@pytest.mark.parametrize("bad", [
    dict(winner_fraction=1.5), dict(winner_fraction=0.1, population=5), dict(population=1),
    dict(gradient_interval=0), dict(p_sac_decay=1.0), dict(crossover_swap_prob=1.2), dict(sigma=0.0),
    dict(zeta=-1.0), dict(winner_fraction=1.0, population=4),
])
def test_config_rejections(bad):
    with pytest.raises(ConfigError):
        ESACConfig(**bad).validate()


def test_reduces_to_plain_es():
    cfg = ESACConfig(population=10, hidden_dims=(8,), p_sac_initial=0.0, crossover_swap_prob=0.0)
    esac = ESAC("cyclic-mdp", cfg, seed=3)
    es = EvolutionStrategy("cyclic-mdp", n=10, sigma=cfg.sigma, alpha_es=cfg.alpha_es, seed=3, hidden_dims=(8,))
    for _ in range(15):
        rec = esac.run_generation()
        es.step()
        np.testing.assert_array_equal(esac.theta_es, es.theta)
        np.testing.assert_array_equal(esac.last_table.raw, es.last_table.raw)
        assert rec.total_gradient_updates == 0


def test_sac_phase_every_generation_and_injection():
    cfg = ESACConfig(population=4, winner_fraction=0.5, gradient_interval=1, p_sac_initial=1.0,
                     p_sac_decay=0.999, hidden_dims=(8,), sac_episodes_per_phase=1)
    cfg.sac = dataclasses.replace(cfg.sac, batch_size=16)
    alg = ESAC("pendulum", cfg, seed=0)
    for g in range(1, 4):
        rec = alg.run_generation()
        assert rec.sac_phase_ran and rec.gradient_updates > 0
        # the SAC member enters unperturbed in the next generation
        assert len(alg.injected) == 1 + cfg.winners
        np.testing.assert_array_equal(alg.injected[0], alg.sac.theta)
    assert alg.mutation.sigma >= cfg.sigma
    # n=2, e=0.5: one crossed winner plus the SAC policy, no fresh perturbations
    tiny = ESAC("pendulum", dataclasses.replace(cfg, population=2), seed=0)
    tiny.run_generation()
    tiny.run_generation()
    assert tiny.last_population.injected == 2


def test_sac_member_fitness_is_its_episode_return():
    from esac.envs import make_env, run_episode
    from esac.es import episode_seeds
    from esac.policies import DeterministicPolicy

    cfg = ESACConfig(gradient_interval=1, **SMALL)
    alg = ESAC("pendulum", cfg, seed=1)
    alg.run_generation()
    alg.run_generation()
    pop = alg.last_population
    env = make_env("pendulum")
    expected = run_episode(env, DeterministicPolicy(pop.members[0], alg.spec), episode_seeds(1, 2, 0, 1)[0])[0]
    assert alg.last_table.raw[0] == expected


def _trace(workers):
    with ParallelEvaluator(workers) as ev:
        alg = ESAC("pendulum", ESACConfig(gradient_interval=2, **SMALL), seed=5, evaluator=ev)
        recs = [alg.run_generation().to_dict() for _ in range(4)]
    for r in recs:
        r.pop("wall_s")
    return recs, alg.theta_es


def test_runs_are_reproducible_and_worker_independent():
    a, ta = _trace(1)
    b, tb = _trace(1)
    c, tc = _trace(2)
    assert a == b == c
    np.testing.assert_array_equal(ta, tb)
    np.testing.assert_array_equal(ta, tc)


def test_no_vector_persists_except_the_sac_member():
    cfg = ESACConfig(population=10, gradient_interval=3, hidden_dims=(8,), sac_episodes_per_phase=1)
    cfg.sac = dataclasses.replace(cfg.sac, batch_size=32)
    alg = ESAC("pendulum", cfg, seed=2)
    seen = []
    for _ in range(8):
        alg.run_generation()
        pop = alg.last_population
        # the SAC member only changes when a SAC phase runs, so it is exempt
        sac = alg.sac.theta.tobytes()
        seen.append({pop.members[i].tobytes() for i in range(pop.size)} - {sac})
        # winners are members of the evaluated population, never the unperturbed base
        assert not any(np.array_equal(p, pop.base) for p in alg.last_winners.params)
    for a, b, c in zip(seen, seen[1:], seen[2:]):
        assert not (a & b & c)


def test_phase_losses_are_recorded():
    cfg = ESACConfig(gradient_interval=1, **SMALL)
    cfg.sac = dataclasses.replace(cfg.sac, batch_size=32)
    rec = ESAC("pendulum", cfg, seed=0).run_generation()
    assert rec.sac_phase_ran and set(rec.losses) == {"value_loss", "q1_loss", "q2_loss", "policy_loss"}

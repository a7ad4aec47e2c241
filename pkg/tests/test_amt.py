import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from esac.amt import AMTRecord, MutationState, amt_update, raw_increment, smooth_l1, tuning_multiplier

rewards = st.floats(-1e4, 1e4, allow_nan=False)


def test_smooth_l1_branches():
    assert smooth_l1(0.5, 0.0) == 0.125
    assert smooth_l1(3.0, 1.0) == 1.5
    with pytest.raises(ValueError):
        smooth_l1(math.inf, 0.0)


@given(rewards, rewards)
def test_smooth_l1_matches_reference(x, y):
    assert smooth_l1(x, y) == pytest.approx(oracles.huber(x, y), rel=1e-12, abs=1e-12)
    assert smooth_l1(x, x) == 0.0


def test_amt_update_example():
    state = MutationState.create(0.005, zeta=0.01, alpha_es=0.005, n=50)
    assert raw_increment(0.005, 0.005, 50, 100.0, 60.0) == pytest.approx(0.79)
    amt_update(state, 100.0, 60.0)
    assert state.sigma == pytest.approx(0.015)
    assert state.history == [AMTRecord(100.0, 60.0, 0.005, pytest.approx(0.01))]


def test_equal_rewards_and_zero_zeta_freeze_sigma():
    state = MutationState.create(0.005, zeta=0.01, alpha_es=0.005, n=50)
    amt_update(state, 7.0, 7.0)
    assert state.sigma == 0.005
    frozen = MutationState.create(0.005, zeta=0.0, alpha_es=0.005, n=50)
    for r in (1e3, 5.0, -20.0):
        amt_update(frozen, r, -100.0)
    assert frozen.sigma == 0.005


@given(st.lists(st.tuples(rewards, rewards), min_size=1, max_size=40), st.floats(1e-4, 1.0), st.floats(0.0, 0.1),
       st.floats(1e-4, 0.1), st.integers(2, 100))
def test_clip_invariants(history, sigma1, zeta, alpha, n):
    state = MutationState.create(sigma1, zeta, alpha, n)
    prev = sigma1
    for t, (r_max, r_avg) in enumerate(history, start=1):
        amt_update(state, r_max, r_avg)
        inc = state.history[-1].increment
        assert 0.0 <= inc <= zeta
        assert state.sigma >= prev
        assert state.sigma <= sigma1 + t * zeta + 1e-12
        prev = state.sigma


def test_empty_and_trivial_multiplier():
    assert tuning_multiplier([], 0.005, 0.005, 50) == 1.0
    assert tuning_multiplier([(3.0, 3.0)], 0.005, 0.005, 50) == 1.0


def test_multiplier_frozen_example():
    # oracles.iterate_sigma(0.005, 0.005, 50, hist) = 0.7958333171632078
    hist = [(100, 60), (5, 4.5), (-3, -10)]
    lam = tuning_multiplier(hist, 0.005, 0.005, 50)
    assert 0.005 * lam == pytest.approx(0.7958333171632078, rel=1e-12)


@given(st.lists(st.tuples(rewards, rewards), min_size=1, max_size=50), st.integers(0, 2**32 - 1))
def test_multiplier_matches_iteration(history, seed):
    rng = np.random.default_rng(seed)
    sigma1, alpha, n = rng.uniform(1e-3, 1), rng.uniform(1e-4, 1e-2), int(rng.integers(2, 100))
    expected = oracles.iterate_sigma(sigma1, alpha, n, history)
    assert sigma1 * tuning_multiplier(history, sigma1, alpha, n) == pytest.approx(expected, rel=1e-10)


def test_smooth_l1_joins_smoothly_at_one():
    h = 1e-7
    assert smooth_l1(1.0, 0.0) == 0.5
    left = (smooth_l1(1.0, 0.0) - smooth_l1(1.0 - h, 0.0)) / h
    right = (smooth_l1(1.0 + h, 0.0) - smooth_l1(1.0, 0.0)) / h
    assert left == pytest.approx(1.0, abs=1e-6) and right == pytest.approx(1.0, abs=1e-6)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from esac.es import FitnessTable, make_population
from esac.orchestrator import ConfigError, ESACConfig, select_winners


def _pop(n, dim=3):
    return make_population(np.zeros(dim), 0.1, 0, 1, n)


def test_winner_count_default():
    assert ESACConfig().winners == 20


def test_tie_example():
    raw = [3.0, 9.0, 1.0, 9.0, 2.0]
    w = select_winners(FitnessTable.from_returns(raw), _pop(5), 0.4)
    assert w.indices.tolist() == [1, 3]
    np.testing.assert_array_equal(w.raw_returns, [9.0, 9.0])


def test_full_fraction_sorts_everything():
    raw = np.array([0.5, -1.0, 2.0, 0.5])
    pop = _pop(4)
    w = select_winners(FitnessTable.from_returns(raw), pop, 1.0)
    assert w.indices.tolist() == [2, 0, 3, 1]
    np.testing.assert_array_equal(w.params, pop.members[[2, 0, 3, 1]])


def test_too_few_winners_rejected():
    with pytest.raises(ConfigError):
        select_winners(FitnessTable.from_returns([1.0, 2.0]), _pop(2), 0.4)


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=60), st.floats(0.01, 1.0))
def test_matches_full_sort_with_ties(values, e):
    raw = [float(v) for v in values]
    n = len(raw)
    w = int(np.floor(n * e + 1e-9))
    if w < 1:
        return
    got = select_winners(FitnessTable.from_returns(raw), _pop(n), e)
    assert got.indices.tolist() == oracles.top_winners(raw, w)

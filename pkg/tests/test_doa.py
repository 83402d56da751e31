import numpy as np
import pytest

from graphblotto.doa import DoaConfig, DoaError, run_doa
from graphblotto.graph import Graph, reachable_sets
from graphblotto.payoff import GameRules

CYCLE = Graph(3, frozenset({(0, 1), (1, 2), (2, 0)}))
RULES = GameRules("homogeneous", 0.25)
D_X = np.array([[0.7, 0.1, 0.2]])
D_Y = np.array([[0.2, 0.2, 0.6]])


@pytest.fixture(scope="module")
def solved():
    return run_doa(CYCLE, D_X, D_Y, RULES, DoaConfig(epsilon=0.01, max_iterations=60))


def test_converges_within_epsilon(solved):
    assert solved.converged
    assert solved.gap <= 0.01 + 1e-9
    assert solved.lower <= solved.value + 1e-6
    assert solved.value <= solved.upper + 1e-6


def test_bounds_are_monotone(solved):
    lowers = [r.lower for r in solved.trace]
    uppers = [r.upper for r in solved.trace]
    assert all(a <= b + 1e-12 for a, b in zip(lowers, lowers[1:]))
    assert all(a >= b - 1e-12 for a, b in zip(uppers, uppers[1:]))


def test_trace_is_complete(solved):
    assert len(solved.trace) == solved.iterations
    for i, rec in enumerate(solved.trace, start=1):
        assert rec.iteration == i
        assert rec.support_x >= 1 and rec.support_y >= 1
        assert rec.elapsed_ms >= 0.0


def test_support_strategies_are_reachable(solved):
    reach_x = reachable_sets(CYCLE, D_X)
    reach_y = reachable_sets(CYCLE, D_Y)
    for strategy in solved.mix_x.strategies:
        assert reach_x.contains(strategy)
    for strategy in solved.mix_y.strategies:
        assert reach_y.contains(strategy)


def test_symmetric_game_value_is_zero():
    result = run_doa(CYCLE, D_X, D_X, RULES, DoaConfig(epsilon=0.01, max_iterations=60))
    assert result.converged
    assert abs(result.value) <= 0.01


@pytest.fixture(scope="module")
def solved_unpruned():
    return run_doa(
        CYCLE, D_X, D_Y, RULES, DoaConfig(epsilon=0.05, max_iterations=60, prune=False)
    )


def test_no_pruning_still_converges(solved_unpruned):
    assert solved_unpruned.converged
    assert solved_unpruned.gap <= 0.05 + 1e-9


def test_pruning_matches_unpruned_value(solved_unpruned):
    pruned = run_doa(CYCLE, D_X, D_Y, RULES, DoaConfig(epsilon=0.05, max_iterations=60))
    assert pruned.value == pytest.approx(solved_unpruned.value, abs=0.1)


def test_deterministic(solved):
    again = run_doa(CYCLE, D_X, D_Y, RULES, DoaConfig(epsilon=0.01, max_iterations=60))
    assert again.value == solved.value
    assert again.iterations == solved.iterations
    assert np.array_equal(again.mix_x.probabilities, solved.mix_x.probabilities)


def test_config_validation():
    with pytest.raises(DoaError):
        DoaConfig(epsilon=0.0)
    with pytest.raises(DoaError):
        DoaConfig(max_iterations=0)


def test_iteration_cap_flagged():
    result = run_doa(CYCLE, D_X, D_Y, RULES, DoaConfig(epsilon=1e-9, max_iterations=2))
    assert not result.converged
    assert result.iterations == 2

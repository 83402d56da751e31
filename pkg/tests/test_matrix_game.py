import numpy as np
import pytest

from graphblotto.matrix_game import (
    MixedStrategy,
    build_utility_matrix,
    expected_utility,
    extend_utility_matrix,
    solve_subgame,
)
from graphblotto.optim import LpError
from graphblotto.payoff import GameRules

RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])


def test_rps_value_and_mixes():
    eq = solve_subgame(RPS)
    assert eq.value == pytest.approx(0.0, abs=1e-9)
    assert eq.p_x == pytest.approx(np.full(3, 1 / 3), abs=1e-9)
    assert eq.p_y == pytest.approx(np.full(3, 1 / 3), abs=1e-9)


def test_saddle_point_matrix():
    u = np.array([[4.0, 2.0], [1.0, 3.0]])
    eq = solve_subgame(u)
    # no saddle in pure strategies; value from the 2x2 mixing formula
    assert eq.value == pytest.approx(10 / 4)


def test_dominant_row():
    u = np.array([[2.0, 3.0], [0.0, 1.0]])
    eq = solve_subgame(u)
    assert eq.value == pytest.approx(2.0)
    assert eq.p_x == pytest.approx([1.0, 0.0], abs=1e-9)


def test_equilibrium_sandwich():
    """No pure deviation beats the equilibrium mix for either player."""
    rng = np.random.default_rng(21)
    for _ in range(100):
        u = rng.normal(size=(rng.integers(2, 9), rng.integers(2, 9)))
        eq = solve_subgame(u)
        row_payoffs = u @ eq.p_y
        col_payoffs = eq.p_x @ u
        assert row_payoffs.max() <= eq.value + 1e-7
        assert col_payoffs.min() >= eq.value - 1e-7
        assert expected_utility(u, eq.p_x, eq.p_y) == pytest.approx(eq.value, abs=1e-7)


def test_maximin_equals_minimax():
    rng = np.random.default_rng(29)
    for _ in range(100):
        u = rng.normal(size=(8, 8))
        eq = solve_subgame(u)  # raises on a duality gap beyond 1e-6
        assert np.isfinite(eq.value)


def test_extend_matrix_matches_rebuild():
    rules = GameRules("homogeneous", 0.25)
    rng = np.random.default_rng(31)
    xs = [rng.dirichlet(np.ones(3)) for _ in range(3)]
    ys = [rng.dirichlet(np.ones(3)) for _ in range(2)]
    u = build_utility_matrix(xs, ys, rules)
    new_x = rng.dirichlet(np.ones(3))
    new_y = rng.dirichlet(np.ones(3))
    xs.append(new_x)
    ys.append(new_y)
    extended = extend_utility_matrix(u, xs, ys, rules, new_x=new_x, new_y=new_y)
    assert np.allclose(extended, build_utility_matrix(xs, ys, rules))


def test_mixed_strategy_validation():
    s = np.array([0.5, 0.5])
    with pytest.raises(LpError):
        MixedStrategy((s,), np.array([0.7]))
    with pytest.raises(LpError):
        MixedStrategy((s, s), np.array([1.0]))
    mix = MixedStrategy((s,), np.array([1.0]))
    assert mix.support_size == 1


def test_mixed_strategy_expected_value():
    rules = GameRules("homogeneous", 0.25)
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    mix = MixedStrategy((a, b), np.array([0.5, 0.5]))
    pure = np.array([0.5, 0.5])
    # u(a, pure) = clip(0.5/0.25) + clip(-0.5/0.25) = 0; same for b
    assert mix.expected_against(pure, rules, role="x") == pytest.approx(0.0)
    assert mix.expected_against(pure, rules, role="y") == pytest.approx(0.0)

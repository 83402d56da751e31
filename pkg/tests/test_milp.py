import itertools

import numpy as np
import pytest

from graphblotto.optim import EQ, GE, LE, LinearProgram, MilpProblem, solve_lp, solve_milp


def _random_milp(rng, max_binaries=8):
    n_bin = int(rng.integers(2, max_binaries + 1))
    n_cont = int(rng.integers(0, 3))
    lp = LinearProgram("max")
    binaries = []
    for _ in range(n_bin):
        binaries.append(lp.add_var(obj=float(rng.normal()), ub=1.0))
    for _ in range(n_cont):
        lp.add_var(obj=float(rng.normal()), ub=float(rng.uniform(0.5, 2.0)))
    for _ in range(int(rng.integers(1, 5))):
        coeffs = {j: float(rng.normal()) for j in range(lp.n_vars)}
        lp.add_row(coeffs, LE, float(rng.uniform(0.5, 3.0)))
    return MilpProblem(lp, frozenset(binaries)), binaries


def _brute_force(problem, binaries):
    best = None
    lp = problem.base
    for bits in itertools.product((0, 1), repeat=len(binaries)):
        sub = lp.copy()
        for j, v in zip(binaries, bits):
            sub.lb[j] = float(v)
            sub.ub[j] = float(v)
        res = solve_lp(sub)
        if res.is_optimal and (best is None or res.objective > best):
            best = res.objective
    return best


def test_matches_exhaustive_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(40):
        problem, binaries = _random_milp(rng)
        res = solve_milp(problem)
        ref = _brute_force(problem, binaries)
        if ref is None:
            assert res.status == "infeasible"
        else:
            assert res.status == "optimal"
            assert res.objective == pytest.approx(ref, abs=1e-6)


def test_binaries_are_integral():
    rng = np.random.default_rng(9)
    for _ in range(20):
        problem, binaries = _random_milp(rng)
        res = solve_milp(problem)
        if res.status == "optimal":
            for j in binaries:
                assert res.x[j] in (0.0, 1.0)


def test_deterministic():
    rng = np.random.default_rng(13)
    problem, _ = _random_milp(rng)
    first = solve_milp(problem)
    second = solve_milp(problem)
    assert first.objective == second.objective
    assert np.array_equal(first.x, second.x)
    assert first.nodes == second.nodes


def test_knapsack():
    lp = LinearProgram("max")
    values = [6.0, 10.0, 12.0]
    weights = [1.0, 2.0, 3.0]
    xs = [lp.add_var(obj=v, ub=1.0) for v in values]
    lp.add_row({x: w for x, w in zip(xs, weights)}, LE, 5.0)
    res = solve_milp(MilpProblem(lp, frozenset(xs)))
    assert res.objective == pytest.approx(22.0)  # items 2 and 3


def test_incumbent_hint_accepted():
    lp = LinearProgram("max")
    x = lp.add_var(obj=1.0, ub=1.0)
    y = lp.add_var(obj=1.0, ub=1.0)
    lp.add_row({x: 1.0, y: 1.0}, LE, 1.5)
    hint_x = np.array([1.0, 0.0])
    res = solve_milp(MilpProblem(lp, frozenset({x, y})), incumbent_hint=(1.0, hint_x))
    assert res.objective == pytest.approx(1.0)


def test_node_limit_reports_gap():
    rng = np.random.default_rng(17)
    lp = LinearProgram("max")
    binaries = [lp.add_var(obj=float(rng.uniform(1, 2)), ub=1.0) for _ in range(12)]
    lp.add_row({j: float(rng.uniform(0.5, 1.5)) for j in binaries}, LE, 3.7)
    res = solve_milp(MilpProblem(lp, frozenset(binaries)), node_limit=3)
    assert res.status in ("optimal", "iteration_limit")
    if res.status == "iteration_limit":
        assert res.gap > 0


def test_pure_lp_passthrough():
    lp = LinearProgram("max")
    x = lp.add_var(obj=2.0, ub=3.0)
    res = solve_milp(MilpProblem(lp, frozenset()))
    assert res.objective == pytest.approx(6.0)

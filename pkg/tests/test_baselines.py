import io
import math

import numpy as np
import pytest

from graphblotto.baselines import (
    BASELINE_KINDS,
    BaselineError,
    BaselineSpec,
    TrialReport,
    baseline_mix,
    perturb,
    random_reachable_strategy,
    run_trials,
    vertex_baselines,
    write_trials_csv,
)
from graphblotto.graph import Graph, reachable_sets
from graphblotto.matrix_game import MixedStrategy
from graphblotto.payoff import GameRules

CYCLE = Graph(3, frozenset({(0, 1), (1, 2), (2, 0)}))
RULES = GameRules("homogeneous", 0.25)
D_X = np.array([[0.7, 0.1, 0.2]])
REACH = reachable_sets(CYCLE, D_X)


def _mix(k, seed=0):
    rng = np.random.default_rng(seed)
    strategies = tuple(random_reachable_strategy(REACH, rng) for _ in range(k))
    return MixedStrategy(strategies, np.full(k, 1.0 / k))


def test_spec_validation():
    with pytest.raises(BaselineError):
        BaselineSpec("replace_0.3", "perturb_player1")
    with pytest.raises(BaselineError):
        BaselineSpec("pure_vertex", "perturb_everyone")
    with pytest.raises(BaselineError):
        BaselineSpec("pure_vertex", "perturb_player1", trials=0)
    assert BaselineSpec("replace_0.4", "perturb_player2").replace_fraction == 0.4
    assert BaselineSpec("pure_vertex", "perturb_player2").replace_fraction is None


def test_replace_counts():
    rng = np.random.default_rng(1)
    mix = _mix(5)
    for fraction, expected in ((0.2, 1), (0.4, 2), (0.8, 4), (1.0, 5)):
        spec = BaselineSpec(f"replace_{fraction}", "perturb_player1")
        out = perturb(mix, spec, REACH, rng)
        changed = sum(
            not np.allclose(a, b) for a, b in zip(out.strategies, mix.strategies)
        )
        assert changed == expected == math.ceil(fraction * 5)
        assert np.array_equal(out.probabilities, mix.probabilities)


def test_replacements_are_reachable():
    rng = np.random.default_rng(2)
    mix = _mix(4)
    spec = BaselineSpec("replace_1.0", "perturb_player1")
    for _ in range(10):
        out = perturb(mix, spec, REACH, rng)
        for strategy in out.strategies:
            assert REACH.contains(strategy)


def test_pure_vertex_is_deterministic_per_seed():
    spec = BaselineSpec("pure_vertex", "perturb_player1")
    a = vertex_baselines(REACH, spec, np.random.default_rng(7))
    b = vertex_baselines(REACH, spec, np.random.default_rng(7))
    assert a.support_size == 1
    assert np.array_equal(a.strategies[0], b.strategies[0])


def test_uniform_vertices_probabilities():
    spec = BaselineSpec("uniform_vertices", "perturb_player1")
    mix = vertex_baselines(REACH, spec, np.random.default_rng(0))
    count = REACH.vertices[0].shape[0]
    assert mix.support_size == count == 8
    assert mix.probabilities == pytest.approx(np.full(count, 1 / count))


def test_single_vertex_reachable_set_baselines_coincide():
    g = Graph(1, frozenset())
    reach = reachable_sets(g, np.array([[1.0]]))
    pure = vertex_baselines(reach, BaselineSpec("pure_vertex", "perturb_player1"),
                            np.random.default_rng(0))
    uniform = vertex_baselines(reach, BaselineSpec("uniform_vertices", "perturb_player1"),
                               np.random.default_rng(0))
    assert pure.support_size == uniform.support_size == 1
    assert np.array_equal(pure.strategies[0], uniform.strategies[0])


def test_baseline_mix_dispatch():
    mix = _mix(3)
    rng = np.random.default_rng(3)
    for kind in BASELINE_KINDS:
        spec = BaselineSpec(kind, "perturb_player1")
        out = baseline_mix(mix, spec, REACH, rng)
        assert abs(out.probabilities.sum() - 1.0) < 1e-9


def test_trial_report_statistics():
    spec = BaselineSpec("pure_vertex", "perturb_player1", trials=4)
    report = TrialReport(spec, np.array([1.0, 2.0, 3.0, 4.0]), 0.5)
    assert report.mean == pytest.approx(2.5)
    assert report.quartiles == pytest.approx((1.75, 2.5, 3.25))


def test_trials_csv_layout():
    spec = BaselineSpec("pure_vertex", "perturb_player2", trials=2)
    report = TrialReport(spec, np.array([0.25, -0.5]), -0.1)
    buffer = io.StringIO()
    write_trials_csv([report], buffer)
    lines = buffer.getvalue().strip().splitlines()
    assert lines[0] == "kind,scheme,trial,utility,equilibrium_value"
    assert len(lines) == 3
    assert lines[1].startswith("pure_vertex,perturb_player2,0,0.25")


def test_run_trials_seeded_repeatable():
    d_y = np.array([[0.2, 0.2, 0.6]])
    reach_y = reachable_sets(CYCLE, d_y)
    mix_x = MixedStrategy((D_X,), np.array([1.0]))
    mix_y = MixedStrategy((d_y,), np.array([1.0]))
    spec = BaselineSpec("replace_1.0", "perturb_player2", trials=3, seed=11)
    first = run_trials(spec, mix_x, mix_y, REACH, reach_y, RULES, 0.0)
    second = run_trials(spec, mix_x, mix_y, REACH, reach_y, RULES, 0.0)
    assert np.array_equal(first.utilities, second.utilities)

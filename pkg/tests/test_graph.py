import numpy as np
import pytest

from graphblotto.graph import (
    Graph,
    GraphError,
    apply_transition,
    build_adjacency,
    enumerate_extreme_actions,
    extreme_count,
    membership,
    reachable_sets,
    reachable_vertices,
    validate_distribution,
)

CYCLE = Graph(3, frozenset({(0, 1), (1, 2), (2, 0)}))
COMPLETE = Graph(3, frozenset({(a, b) for a in range(3) for b in range(3) if a != b}))


def test_adjacency_orientation():
    adj = build_adjacency(CYCLE)
    # edge (0, 1): mass may flow from node 0 to node 1
    assert adj[1, 0] == 1
    assert adj[0, 1] == 0
    assert np.all(np.diagonal(adj) == 1)


def test_adjacency_without_stay():
    g = Graph(2, frozenset({(0, 1), (1, 0)}), allow_stay=False)
    adj = build_adjacency(g)
    assert np.all(np.diagonal(adj) == 0)


def test_extreme_count_is_outdegree_product():
    assert extreme_count(build_adjacency(CYCLE)) == 2 * 2 * 2
    assert extreme_count(build_adjacency(COMPLETE)) == 3 * 3 * 3


def test_extremes_are_binary_column_stochastic():
    extremes = enumerate_extreme_actions(build_adjacency(CYCLE))
    assert len(extremes) == 8
    for t in extremes:
        assert set(np.unique(t)) <= {0.0, 1.0}
        assert np.allclose(t.sum(axis=0), 1.0)


def test_dead_end_node_rejected():
    g = Graph(2, frozenset({(0, 1)}), allow_stay=False)
    with pytest.raises(GraphError):
        enumerate_extreme_actions(build_adjacency(g))


def test_transition_conserves_mass():
    rng = np.random.default_rng(0)
    extremes = enumerate_extreme_actions(build_adjacency(COMPLETE))
    for _ in range(1000):
        d = rng.dirichlet(np.ones(3))
        t = extremes[rng.integers(len(extremes))]
        out = apply_transition(t, d)
        assert abs(out.sum() - 1.0) <= 1e-12
        assert np.all(out >= -1e-15)


def test_reachable_vertices_unit_mass():
    extremes = enumerate_extreme_actions(build_adjacency(CYCLE))
    verts = reachable_vertices(extremes, np.array([1.0, 0.0, 0.0]))
    expect = {(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)}
    assert {tuple(v) for v in verts} == expect


def test_membership_accepts_hull_points():
    verts = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    inside, lam = membership(np.array([0.3, 0.7, 0.0]), verts)
    assert inside
    assert np.allclose(lam @ verts, [0.3, 0.7, 0.0], atol=1e-8)


def test_membership_rejects_outside_points():
    verts = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    inside, lam = membership(np.array([0.0, 0.0, 1.0]), verts)
    assert not inside and lam is None


def test_reachable_sets_contains_every_vertex_mix():
    rng = np.random.default_rng(1)
    d = np.array([[0.7, 0.1, 0.2], [0.4, 0.4, 0.2], [0.3, 0.1, 0.6]])
    reach = reachable_sets(CYCLE, d)
    assert reach.type_count == 3 and reach.node_count == 3
    for _ in range(20):
        point = np.array(
            [rng.dirichlet(np.ones(v.shape[0])) @ v for v in reach.vertices]
        )
        assert reach.contains(point)


def test_validate_distribution():
    validate_distribution(np.array([[0.5, 0.5]]))
    with pytest.raises(GraphError):
        validate_distribution(np.array([[0.5, 0.4]]))
    with pytest.raises(GraphError):
        validate_distribution(np.array([[1.2, -0.2]]))


def test_graph_validation():
    with pytest.raises(GraphError):
        Graph(2, frozenset({(0, 5)}))
    with pytest.raises(GraphError):
        Graph(0, frozenset())

"""Directed arena graphs, admissible transitions, and reachable strategy sets.

A transition matrix moves population mass along edges: entry ``T[i, j]``
is the fraction of node ``j``'s population sent to node ``i``, so every
column sums to one and mass is conserved.  The one-step reachable set of
a distribution row is the convex hull of its images under the finitely
many binary ("all mass to one destination") transition matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from graphblotto.optim import EQ, LinearProgram, solve_lp

DEDUP_TOL = 1e-12
MEMBERSHIP_TOL = 1e-8


class GraphError(ValueError):
    """Invalid graph structure or an inadmissible configuration."""


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: frozenset[tuple[int, int]]
    allow_stay: bool = True

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphError("graph needs at least one node")
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))
        for tail, head in self.edges:
            if not (0 <= tail < self.node_count and 0 <= head < self.node_count):
                raise GraphError(f"edge ({tail}, {head}) endpoint out of range")


def build_adjacency(graph: Graph) -> np.ndarray:
    """Binary matrix with A[i, j] = 1 iff mass may flow from node j to node i."""
    n = graph.node_count
    adj = np.zeros((n, n), dtype=int)
    for tail, head in graph.edges:
        adj[head, tail] = 1
    if graph.allow_stay:
        np.fill_diagonal(adj, 1)
    return adj


def enumerate_extreme_actions(adj: np.ndarray) -> list[np.ndarray]:
    """All binary column-stochastic matrices respecting the adjacency.

    The count is the product over source nodes of their admissible
    destination counts; a node with no admissible destination is a
    structural error.
    """
    n = adj.shape[0]
    choices = []
    for j in range(n):
        dests = np.flatnonzero(adj[:, j])
        if dests.size == 0:
            raise GraphError(f"node {j} has no admissible destination (allow_stay off?)")
        choices.append(dests)
    extremes = []
    for combo in itertools.product(*choices):
        t = np.zeros((n, n))
        for j, i in enumerate(combo):
            t[i, j] = 1.0
        extremes.append(t)
    return extremes


def extreme_count(adj: np.ndarray) -> int:
    degrees = (adj != 0).sum(axis=0)
    if np.any(degrees == 0):
        raise GraphError("node with no admissible destination")
    return int(np.prod(degrees))


def apply_transition(t: np.ndarray, d_row: np.ndarray) -> np.ndarray:
    if t.shape[1] != d_row.shape[0]:
        raise GraphError(f"dimension mismatch: {t.shape} vs {d_row.shape}")
    return t @ d_row


def reachable_vertices(extremes: list[np.ndarray], d_row: np.ndarray) -> np.ndarray:
    """Distinct images of ``d_row`` under the extreme transitions (hull vertices
    plus possibly interior duplicates of them; duplicates removed at DEDUP_TOL)."""
    if not extremes:
        raise GraphError("empty extreme action set")
    images = np.array([apply_transition(t, d_row) for t in extremes])
    keep: list[np.ndarray] = []
    for row in images:
        if not any(np.all(np.abs(row - k) <= DEDUP_TOL) for k in keep):
            keep.append(row)
    return np.array(keep)


def membership(
    strategy_row: np.ndarray,
    vertices: np.ndarray,
    tol: float = MEMBERSHIP_TOL,
) -> tuple[bool, np.ndarray | None]:
    """Convex-hull membership by elastic LP: minimal total slack on the
    combination constraints; member iff the slack optimum is <= tol.
    Returns the certificate weights on success."""
    v_count, n = vertices.shape
    if strategy_row.shape[0] != n:
        raise GraphError("strategy/vertex dimension mismatch")
    lp = LinearProgram("min", "membership")
    lam = [lp.add_var(name=f"L{k}") for k in range(v_count)]
    slack_pos = [lp.add_var(obj=1.0, name=f"EP{j}") for j in range(n)]
    slack_neg = [lp.add_var(obj=1.0, name=f"EN{j}") for j in range(n)]
    for j in range(n):
        coeffs = {lam[k]: vertices[k, j] for k in range(v_count)}
        coeffs[slack_pos[j]] = 1.0
        coeffs[slack_neg[j]] = -1.0
        lp.add_row(coeffs, EQ, float(strategy_row[j]))
    lp.add_row({k: 1.0 for k in lam}, EQ, 1.0)
    res = solve_lp(lp)
    if not res.is_optimal:
        raise GraphError(f"membership LP failed: {res.status}")
    if res.objective > tol:
        return False, None
    weights = np.clip(res.x[: v_count], 0.0, None)
    weights /= weights.sum()
    return True, weights


@dataclass(frozen=True)
class ReachableSets:
    """Per-type reachable vertex arrays for one player (type -> V_i x N)."""

    vertices: tuple[np.ndarray, ...]

    @property
    def type_count(self) -> int:
        return len(self.vertices)

    @property
    def node_count(self) -> int:
        return self.vertices[0].shape[1]

    def contains(self, strategy: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        return all(
            membership(strategy[i], self.vertices[i], tol)[0]
            for i in range(self.type_count)
        )


def reachable_sets(graph: Graph, distribution: np.ndarray) -> ReachableSets:
    """Reachable vertex lists for every robot type of a player distribution."""
    d = np.atleast_2d(np.asarray(distribution, dtype=float))
    validate_distribution(d)
    extremes = enumerate_extreme_actions(build_adjacency(graph))
    return ReachableSets(tuple(reachable_vertices(extremes, row) for row in d))


def validate_distribution(d: np.ndarray, tol: float = 1e-9) -> None:
    if np.any(d < -tol):
        raise GraphError("distribution has negative entries")
    sums = d.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise GraphError(f"distribution rows must sum to 1 (got {sums})")

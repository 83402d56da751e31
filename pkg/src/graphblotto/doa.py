"""Double-oracle equilibrium computation.

Starting from small pure-strategy sets for both players, each iteration
solves the restricted zero-sum matrix game, then asks each player's exact
best-response oracle for an improving pure strategy against the other
player's restricted-game mix.  The oracle values give a shrinking
upper/lower bound sandwich on the game value; the loop stops when the
sandwich width drops below epsilon.

Both oracle calls reuse one maximizing formulation: the score is odd
(u(x, y) = -u(y, x)), so the minimizing player's best response is the
maximizing response against the other side's mix with the value negated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from graphblotto.best_response import BestResponseProblem, solve_br
from graphblotto.graph import Graph, ReachableSets, reachable_sets
from graphblotto.matrix_game import (
    MixedStrategy,
    build_utility_matrix,
    extend_utility_matrix,
    solve_subgame,
)
from graphblotto.payoff import GameRules

STRATEGY_MATCH_TOL = 1e-9


class DoaError(RuntimeError):
    pass


@dataclass(frozen=True)
class DoaConfig:
    epsilon: float = 1e-3
    max_iterations: int = 60
    prune: bool = True
    prune_threshold: float = 1e-6
    br_gap_tol: float = 1e-6
    br_node_limit: int = 10**6
    external_command: str | None = None
    # called with each IterationRecord as it is produced (progress logging)
    on_iteration: Callable[["IterationRecord"], None] | None = None
    # wall-clock budget in seconds; the loop stops unconverged once exceeded
    time_limit: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DoaError("epsilon must be positive")
        if self.max_iterations < 1:
            raise DoaError("need at least one iteration")
        if self.time_limit is not None and self.time_limit <= 0:
            raise DoaError("time limit must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    lower: float
    upper: float
    subgame_value: float
    support_x: int
    support_y: int
    elapsed_ms: float


@dataclass
class DoaResult:
    value: float
    lower: float
    upper: float
    mix_x: MixedStrategy
    mix_y: MixedStrategy
    converged: bool
    iterations: int
    trace: list[IterationRecord]

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass
class DoaState:
    xs: list[np.ndarray]
    ys: list[np.ndarray]
    utility: np.ndarray
    lower: float = -np.inf
    upper: float = np.inf
    trace: list[IterationRecord] = field(default_factory=list)


def _seed_strategies(reach: ReachableSets, distribution: np.ndarray) -> list[np.ndarray]:
    """Initial pure strategies: stay put (when reachable) and the first
    vertex of every type's reachable set."""
    d = np.atleast_2d(np.asarray(distribution, dtype=float))
    seeds = []
    if reach.contains(d):
        seeds.append(d.copy())
    seeds.append(np.array([reach.vertices[i][0] for i in range(reach.type_count)]))
    if len(seeds) == 2 and _find_match(seeds[1], seeds[:1]) is not None:
        seeds.pop()
    return seeds


def _find_match(strategy: np.ndarray, pool: list[np.ndarray]) -> int | None:
    for i, s in enumerate(pool):
        if s.shape == strategy.shape and np.max(np.abs(s - strategy)) <= STRATEGY_MATCH_TOL:
            return i
    return None


def _support_mix(
    strategies: list[np.ndarray], probs: np.ndarray, threshold: float
) -> MixedStrategy:
    """Mix restricted to its support: strategies below the probability
    threshold contribute (near) nothing to an opponent's expected score,
    so dropping them shrinks the oracle MILP without changing its optimum.
    The master strategy sets stay untouched."""
    keep = np.flatnonzero(probs >= threshold)
    if keep.size == 0 or keep.size == len(strategies):
        return MixedStrategy(tuple(strategies), probs)
    p = probs[keep]
    return MixedStrategy(tuple(strategies[i] for i in keep), p / p.sum())


def run_doa(
    graph: Graph,
    d_x: np.ndarray,
    d_y: np.ndarray,
    rules: GameRules,
    config: DoaConfig = DoaConfig(),
) -> DoaResult:
    """Solve the one-step game on ``graph`` to an epsilon-equilibrium."""
    reach_x = reachable_sets(graph, d_x)
    reach_y = reachable_sets(graph, d_y)
    state = DoaState(
        xs=_seed_strategies(reach_x, d_x),
        ys=_seed_strategies(reach_y, d_y),
        utility=np.empty((0, 0)),
    )
    state.utility = build_utility_matrix(state.xs, state.ys, rules)
    start = time.perf_counter()
    mix_x = mix_y = None
    value = 0.0
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        eq = solve_subgame(state.utility)
        p_x, p_y, value = eq.p_x, eq.p_y, eq.value

        mix_x = MixedStrategy(tuple(state.xs), p_x)
        mix_y = MixedStrategy(tuple(state.ys), p_y)
        if config.prune:
            oracle_mix_x = _support_mix(state.xs, p_x, config.prune_threshold)
            oracle_mix_y = _support_mix(state.ys, p_y, config.prune_threshold)
        else:
            oracle_mix_x, oracle_mix_y = mix_x, mix_y
        br_x, val_x, cert_x = solve_br(
            BestResponseProblem(reach_x, oracle_mix_y, rules),
            gap_tol=config.br_gap_tol,
            node_limit=config.br_node_limit,
            external_command=config.external_command,
        )
        br_y, val_y, cert_y = solve_br(
            BestResponseProblem(reach_y, oracle_mix_x, rules),
            gap_tol=config.br_gap_tol,
            node_limit=config.br_node_limit,
            external_command=config.external_command,
        )
        if not (cert_x and cert_y):
            raise DoaError("best-response oracle hit its node limit uncertified")

        state.upper = min(state.upper, val_x)
        state.lower = max(state.lower, -val_y)
        state.trace.append(
            IterationRecord(
                iteration,
                state.lower,
                state.upper,
                value,
                len(state.xs),
                len(state.ys),
                (time.perf_counter() - start) * 1000.0,
            )
        )
        if config.on_iteration is not None:
            config.on_iteration(state.trace[-1])
        if state.upper - state.lower <= config.epsilon:
            converged = True
            break
        if (
            config.time_limit is not None
            and time.perf_counter() - start > config.time_limit
        ):
            break

        grew = False
        if _find_match(br_x, state.xs) is None:
            state.xs.append(br_x)
            state.utility = extend_utility_matrix(
                state.utility, state.xs, state.ys, rules, new_x=br_x
            )
            grew = True
        if _find_match(br_y, state.ys) is None:
            state.ys.append(br_y)
            state.utility = extend_utility_matrix(
                state.utility, state.xs, state.ys, rules, new_y=br_y
            )
            grew = True
        if not grew:
            # neither oracle improves; the restricted equilibrium is exact
            # up to the oracle gap tolerance
            converged = state.upper - state.lower <= config.epsilon
            break

    return DoaResult(
        value=value,
        lower=state.lower,
        upper=state.upper,
        mix_x=_support_mix(list(mix_x.strategies), mix_x.probabilities, config.prune_threshold),
        mix_y=_support_mix(list(mix_y.strategies), mix_y.probabilities, config.prune_threshold),
        converged=converged,
        iterations=iteration,
        trace=state.trace,
    )

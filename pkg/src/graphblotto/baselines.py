"""Perturbation baselines around a solved equilibrium.

Six schemes degrade one player's equilibrium mix — four replace a
fraction of the support with random reachable strategies, two discard
the mix for vertex play — and each perturbed mix is scored by letting
the opponent best-respond.  Around an equilibrium, perturbing the
maximizer can only lower the score and perturbing the minimizer can
only raise it, which is the ordering these trials demonstrate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from graphblotto.best_response import BestResponseProblem, solve_br
from graphblotto.graph import ReachableSets
from graphblotto.matrix_game import MixedStrategy
from graphblotto.payoff import GameRules

REPLACE_FRACTIONS = (0.2, 0.4, 0.8, 1.0)
BASELINE_KINDS = (
    "replace_0.2",
    "replace_0.4",
    "replace_0.8",
    "replace_1.0",
    "pure_vertex",
    "uniform_vertices",
)


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineSpec:
    kind: str  # one of BASELINE_KINDS
    scheme: str  # perturb_player1 | perturb_player2
    trials: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise BaselineError(f"unknown baseline kind {self.kind!r}")
        if self.scheme not in ("perturb_player1", "perturb_player2"):
            raise BaselineError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise BaselineError("need at least one trial")

    @property
    def replace_fraction(self) -> float | None:
        if self.kind.startswith("replace_"):
            return float(self.kind.split("_", 1)[1])
        return None


@dataclass(frozen=True)
class TrialReport:
    spec: BaselineSpec
    utilities: np.ndarray  # one expected utility per trial
    equilibrium_value: float

    @property
    def mean(self) -> float:
        return float(self.utilities.mean())

    @property
    def quartiles(self) -> tuple[float, float, float]:
        q1, q2, q3 = np.percentile(self.utilities, [25, 50, 75])
        return float(q1), float(q2), float(q3)


def random_reachable_strategy(reach: ReachableSets, rng: np.random.Generator) -> np.ndarray:
    """Random point of the reachable polytope: Dirichlet weights on each
    type's vertex list."""
    rows = []
    for verts in reach.vertices:
        lam = rng.dirichlet(np.ones(verts.shape[0]))
        rows.append(lam @ verts)
    return np.array(rows)


def perturb(
    mix: MixedStrategy, spec: BaselineSpec, reach: ReachableSets, rng: np.random.Generator
) -> MixedStrategy:
    """Replace ceil(f*K) support strategies (uniform, without replacement)
    with random reachable strategies; probabilities stay as they are."""
    f = spec.replace_fraction
    if f is None:
        raise BaselineError(f"{spec.kind} is not a replacement baseline")
    k = mix.support_size
    if k == 0:
        raise BaselineError("empty support")
    count = math.ceil(f * k)
    chosen = rng.choice(k, size=count, replace=False)
    strategies = list(mix.strategies)
    for i in chosen:
        strategies[i] = random_reachable_strategy(reach, rng)
    return MixedStrategy(tuple(strategies), mix.probabilities.copy())


def vertex_baselines(
    reach: ReachableSets, spec: BaselineSpec, rng: np.random.Generator
) -> MixedStrategy:
    """Vertex play: one random vertex per type (pure), or a uniform mix
    over joint vertex picks (one strategy per index up to the largest list)."""
    sizes = [v.shape[0] for v in reach.vertices]
    if min(sizes) < 1:
        raise BaselineError("empty vertex list")
    if spec.kind == "pure_vertex":
        picks = [int(rng.integers(s)) for s in sizes]
        strategy = np.array([reach.vertices[i][picks[i]] for i in range(reach.type_count)])
        return MixedStrategy((strategy,), np.array([1.0]))
    if spec.kind == "uniform_vertices":
        count = max(sizes)
        strategies = tuple(
            np.array([reach.vertices[i][k % sizes[i]] for i in range(reach.type_count)])
            for k in range(count)
        )
        return MixedStrategy(strategies, np.full(count, 1.0 / count))
    raise BaselineError(f"{spec.kind} is not a vertex baseline")


def baseline_mix(
    mix: MixedStrategy, spec: BaselineSpec, reach: ReachableSets, rng: np.random.Generator
) -> MixedStrategy:
    if spec.replace_fraction is not None:
        return perturb(mix, spec, reach, rng)
    return vertex_baselines(reach, spec, rng)


def evaluate(
    perturbed: MixedStrategy,
    opponent_reach: ReachableSets,
    rules: GameRules,
    perturbed_role: str,
) -> float:
    """Expected utility (Player 1's) of the perturbed mix once the opponent
    best-responds to it."""
    if perturbed_role not in ("x", "y"):
        raise BaselineError("role must be 'x' or 'y'")
    response, br_value, _ = solve_br(BestResponseProblem(opponent_reach, perturbed, rules))
    # the responder maximizes its own score; flip to Player 1's convention
    # when the responder is Player 2
    return -br_value if perturbed_role == "x" else br_value


def run_trials(
    spec: BaselineSpec,
    mix_x: MixedStrategy,
    mix_y: MixedStrategy,
    reach_x: ReachableSets,
    reach_y: ReachableSets,
    rules: GameRules,
    equilibrium_value: float,
) -> TrialReport:
    """Seeded trial loop for one baseline/scheme combination."""
    perturb_x = spec.scheme == "perturb_player1"
    utilities = np.empty(spec.trials)
    cache: dict[bytes, float] = {}
    for trial in range(spec.trials):
        rng = np.random.default_rng((spec.seed, BASELINE_KINDS.index(spec.kind), trial))
        if perturb_x:
            mix = baseline_mix(mix_x, spec, reach_x, rng)
        else:
            mix = baseline_mix(mix_y, spec, reach_y, rng)
        # vertex baselines repeat mixes across trials; skip duplicate solves
        key = np.round(np.concatenate(
            [np.ravel(s) for s in mix.strategies] + [mix.probabilities]
        ), 12).tobytes()
        if key not in cache:
            if perturb_x:
                cache[key] = evaluate(mix, reach_y, rules, "x")
            else:
                cache[key] = evaluate(mix, reach_x, rules, "y")
        utilities[trial] = cache[key]
    return TrialReport(spec, utilities, equilibrium_value)


def write_trials_csv(reports: list[TrialReport], destination: IO[str]) -> None:
    writer = csv.writer(destination)
    writer.writerow(["kind", "scheme", "trial", "utility", "equilibrium_value"])
    for report in reports:
        for trial, utility in enumerate(report.utilities):
            writer.writerow(
                [
                    report.spec.kind,
                    report.spec.scheme,
                    trial,
                    f"{utility:.12g}",
                    f"{report.equilibrium_value:.12g}",
                ]
            )

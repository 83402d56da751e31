"""Finite utility matrices and their zero-sum matrix-game solutions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graphblotto.optim import EQ, LE, GE, LinearProgram, LpError, solve_lp
from graphblotto.payoff import GameRules

VALUE_TOL = 1e-8


@dataclass(frozen=True)
class MixedStrategy:
    """Finitely many pure strategies played with the given probabilities."""

    strategies: tuple[np.ndarray, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(np.asarray(s, dtype=float) for s in self.strategies))
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if len(self.strategies) != p.shape[0]:
            raise LpError("strategy and probability counts differ")
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
            raise LpError("probabilities must be a distribution")

    @property
    def support_size(self) -> int:
        return len(self.strategies)

    def expected_against(self, pure: np.ndarray, rules: GameRules, role: str = "x") -> float:
        """Expected utility (for Player 1) of this mix versus a pure strategy.

        ``role`` names which side this mix plays: "x" (row) or "y" (column).
        """
        if role == "x":
            return float(
                sum(p * rules.utility(s, pure) for s, p in zip(self.strategies, self.probabilities))
            )
        return float(
            sum(p * rules.utility(pure, s) for s, p in zip(self.strategies, self.probabilities))
        )


@dataclass(frozen=True)
class SubgameEquilibrium:
    p_x: np.ndarray
    p_y: np.ndarray
    value: float


def build_utility_matrix(
    xs: list[np.ndarray], ys: list[np.ndarray], rules: GameRules
) -> np.ndarray:
    if not xs or not ys:
        raise LpError("strategy lists must be nonempty")
    u = np.empty((len(xs), len(ys)))
    for i, sx in enumerate(xs):
        for j, sy in enumerate(ys):
            u[i, j] = rules.utility(sx, sy)
    return u


def extend_utility_matrix(
    u: np.ndarray,
    xs: list[np.ndarray],
    ys: list[np.ndarray],
    rules: GameRules,
    new_x: np.ndarray | None = None,
    new_y: np.ndarray | None = None,
) -> np.ndarray:
    """Append one row and/or column to an existing utility matrix.

    ``xs``/``ys`` are the strategy lists *after* appending the new ones.
    """
    if new_x is not None:
        row = np.array([[rules.utility(new_x, sy) for sy in ys[: u.shape[1]]]])
        u = np.vstack([u, row])
    if new_y is not None:
        col = np.array([[rules.utility(sx, new_y)] for sx in xs])
        u = np.hstack([u, col])
    return u


def _simplex_lp(u: np.ndarray, player: str) -> np.ndarray:
    kx, ky = u.shape
    if player == "x":
        lp = LinearProgram("max", "maximin")
        v = lp.add_var(obj=1.0, lb=-np.inf, name="V")
        p = [lp.add_var(name=f"P{i}") for i in range(kx)]
        for j in range(ky):
            coeffs = {p[i]: -u[i, j] for i in range(kx)}
            coeffs[v] = 1.0
            lp.add_row(coeffs, LE, 0.0)
        lp.add_row({pi: 1.0 for pi in p}, EQ, 1.0)
    else:
        lp = LinearProgram("min", "minimax")
        v = lp.add_var(obj=1.0, lb=-np.inf, name="W")
        p = [lp.add_var(name=f"Q{j}") for j in range(ky)]
        for i in range(kx):
            coeffs = {p[j]: u[i, j] for j in range(ky)}
            coeffs[v] = -1.0
            lp.add_row(coeffs, LE, 0.0)
        lp.add_row({pj: 1.0 for pj in p}, EQ, 1.0)
    res = solve_lp(lp)
    if not res.is_optimal:
        raise LpError(f"subgame LP failed: {res.status}")
    probs = np.clip(res.x[1:], 0.0, None)
    return res.objective, probs / probs.sum()


def solve_subgame(u: np.ndarray) -> SubgameEquilibrium:
    """Maximin mix for the row player, minimax mix for the column player.

    Strong duality makes the two optimal values coincide; both are solved
    to cross-check and the row value is returned.
    """
    u = np.asarray(u, dtype=float)
    vx, p_x = _simplex_lp(u, "x")
    vy, p_y = _simplex_lp(u, "y")
    if abs(vx - vy) > 1e-6:
        raise LpError(f"duality gap in subgame solve: {vx} vs {vy}")
    return SubgameEquilibrium(p_x, p_y, vx)


def expected_utility(u: np.ndarray, p_x: np.ndarray, p_y: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (len(p_x), len(p_y)):
        raise LpError("mix lengths do not match the utility matrix")
    return float(np.asarray(p_x) @ u @ np.asarray(p_y))

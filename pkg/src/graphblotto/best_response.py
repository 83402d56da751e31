"""Best-response optimization against a mixed strategy, as an exact MILP.

The responder maximizes the expected clamped per-node score over its
reachable polytope.  The piecewise-linear score is linearized with
indicator binaries and per-instance big-M constants; the responder's
strategy is tied to the reachable set through convex weights on the
per-type vertex images.  A brute-force lattice oracle over the same
polytope provides an independent lower-bounding check.

Thanks to the odd symmetry of both score functions, one formulation
serves both players: the responder always appears as the maximizing
(first) argument and callers flip signs for the minimizing player.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from graphblotto.graph import ReachableSets
from graphblotto.matrix_game import MixedStrategy
from graphblotto.optim import (
    EQ,
    GE,
    LE,
    LinearProgram,
    MilpProblem,
    SolveResult,
    solve_milp,
    solve_via_external,
)
from graphblotto.payoff import GameRules, g_coefficients

LAMBDA_PRUNE_TOL = 1e-9
GRID_LIMIT = 10**6


class BestResponseError(ValueError):
    pass


@dataclass(frozen=True)
class BigMBounds:
    """Range bounds for the linearized score expressions over the delta box."""

    u_s: float
    u_t: float
    u_dp: float = 0.0
    u_dq: float = 0.0
    u_pq: float = 0.0


@dataclass(frozen=True)
class GridOracleConfig:
    denominator: int = 8  # lattice step is 1/denominator on each weight simplex

    def __post_init__(self):
        if self.denominator < 1:
            raise BestResponseError("grid denominator must be >= 1")


@dataclass(frozen=True)
class BestResponseProblem:
    reachable: ReachableSets
    opponent_mix: MixedStrategy
    rules: GameRules
    big_m: BigMBounds | None = None

    def bounds(self) -> BigMBounds:
        return self.big_m if self.big_m is not None else compute_big_m(self.rules)


def compute_big_m(rules: GameRules) -> BigMBounds:
    """Instance-tight bounds from coefficient L1 norms over per-entry deltas
    in [-1, 1] (allocations are unit-sum fraction rows)."""
    c = rules.threshold
    if rules.mode != "cdh":
        return BigMBounds(u_s=(1.0 + c) / c, u_t=(1.0 + c) / c)
    g = g_coefficients(rules.intrinsic)
    norm = np.abs(g).sum(axis=1)
    gmax = float(norm.max())
    l1 = lambda v: float(np.abs(v).sum())
    g21, g13, g23 = g[1] - g[0], g[0] - g[2], g[1] - g[2]
    return BigMBounds(
        u_s=(gmax + c) / c,
        u_t=(gmax + c) / c,
        u_dp=l1(g21),
        u_dq=l1(g13),
        u_pq=max(l1(g23), l1(g21 - g23), l1(g13 - g23)),
    )


@dataclass
class BrFormulation:
    """A formulated best-response MILP plus the bookkeeping to read it back."""

    problem: MilpProblem
    lambda_slices: list[range]
    strategy_vars: np.ndarray  # (M, N) variable indices
    # (node, block) -> auxiliary variable indices plus the block's
    # aggregated probability weight and opponent constants; opponent
    # strategies indistinguishable at a node share one block
    pair_vars: dict
    objective_offset: float
    reachable: ReachableSets
    rules: GameRules
    opponent_mix: MixedStrategy

    def extract_strategy(self, x: np.ndarray) -> np.ndarray:
        """Reassemble the responder strategy from the weight variables,
        zeroing sub-tolerance weights and renormalizing."""
        rows = []
        for i, sl in enumerate(self.lambda_slices):
            lam = np.clip(x[list(sl)], 0.0, None)
            lam[lam < LAMBDA_PRUNE_TOL] = 0.0
            lam /= lam.sum()
            rows.append(lam @ self.reachable.vertices[i])
        return np.array(rows)

    def assignment_for(self, lambdas: list[np.ndarray]) -> tuple[float, np.ndarray]:
        """Full feasible MILP assignment induced by given convex weights.

        Auxiliary values follow the closed forms the indicator systems
        pin down; used for incumbent seeding and constraint-replay tests.
        Returns (MILP objective value, assignment vector).
        """
        lp = self.problem.base
        x = np.zeros(lp.n_vars)
        strategy = []
        for i, (sl, lam) in enumerate(zip(self.lambda_slices, lambdas)):
            x[list(sl)] = lam
            strategy.append(lam @ self.reachable.vertices[i])
        strategy = np.array(strategy)
        for (i, j), idx in np.ndenumerate(self.strategy_vars):
            x[idx] = strategy[i, j]
        c = self.rules.threshold
        obj = 0.0
        for (j, _), vs in self.pair_vars.items():
            if self.rules.mode == "cdh":
                g = g_coefficients(self.rules.intrinsic)
                gv = g @ strategy[:, j] - vs["consts"]
                g21, g13, g23 = gv[1] - gv[0], gv[0] - gv[2], gv[1] - gv[2]
                dp = max(g21, 0.0)
                p = max(dp, g23)
                dq = max(g13, 0.0)
                q = max(dq, g23)
                pi = gv[0] + p - q
                x[vs["dp"]], x[vs["p"]] = dp, p
                x[vs["dq"]], x[vs["q"]] = dq, q
                x[vs["zdp"]] = 1.0 if g21 > 0 else 0.0
                x[vs["zp"]] = 1.0 if dp >= g23 else 0.0
                x[vs["zdq"]] = 1.0 if g13 > 0 else 0.0
                x[vs["zq"]] = 1.0 if dq >= g23 else 0.0
            else:
                pi = strategy[0, j] - vs["const"]
            f_s = (pi + c) / c
            f_t = (pi - c) / c
            s = max(f_s, 0.0)
            t = max(f_t, 0.0)
            x[vs["s"]], x[vs["t"]] = s, t
            x[vs["z"]] = 1.0 if f_s > 0 else 0.0
            x[vs["w"]] = 1.0 if f_t > 0 else 0.0
            obj += vs["weight"] * (s - t)
        # pinned indicators may disagree at exact ties; either side is
        # feasible there, so defer to the bound
        for k in self.problem.binary_vars:
            x[k] = min(max(x[k], lp.lb[k]), lp.ub[k])
        return obj, x


def _add_common_structure(p: BestResponseProblem, lp: LinearProgram):
    reach = p.reachable
    m, n = reach.type_count, reach.node_count
    lambda_slices = []
    for i in range(m):
        v = reach.vertices[i].shape[0]
        start = lp.n_vars
        for k in range(v):
            lp.add_var(name=f"L_{i}_{k}")
        lambda_slices.append(range(start, start + v))
        lp.add_row({idx: 1.0 for idx in lambda_slices[i]}, EQ, 1.0)
    strategy_vars = np.empty((m, n), dtype=int)
    for i in range(m):
        for j in range(n):
            strategy_vars[i, j] = lp.add_var(ub=1.0, name=f"S_{i}_{j}")
    for i in range(m):
        verts = reach.vertices[i]
        for j in range(n):
            coeffs = {idx: float(verts[k, j]) for k, idx in enumerate(lambda_slices[i])}
            coeffs[int(strategy_vars[i, j])] = -1.0
            lp.add_row(coeffs, EQ, 0.0)
    return lambda_slices, strategy_vars


def _strategy_box(reach: ReachableSets) -> tuple[np.ndarray, np.ndarray]:
    """Per-type, per-node entry ranges over the reachable vertices."""
    lo = np.array([v.min(axis=0) for v in reach.vertices])
    hi = np.array([v.max(axis=0) for v in reach.vertices])
    return lo, hi


def _expr_range(expr: dict[int, float], ranges: dict[int, tuple[float, float]], const: float = 0.0):
    lo = hi = const
    for v, a in expr.items():
        r_lo, r_hi = ranges[v]
        lo += a * (r_lo if a > 0 else r_hi)
        hi += a * (r_hi if a > 0 else r_lo)
    return lo, hi


def _tight_m(lo: float, hi: float, floor: float = 1e-6) -> float:
    """Smallest valid indicator constant for a max-with-zero over [lo, hi]."""
    return max(hi, -lo, floor)


def _fix_indicator(lp, var, f_lo, f_hi):
    """Pin a max-with-zero indicator whose argument range decides it."""
    if f_lo >= 0.0:
        lp.lb[var] = 1.0
    elif f_hi <= 0.0:
        lp.ub[var] = 0.0


def _add_clamp_pair(lp, binaries, prob_k, c, u_s, u_t, expr, const, pi_lo=None, pi_hi=None):
    """Rows of the two max-systems encoding clamp((pi - const)/c) via s - t - 1.

    ``expr`` maps the score pi as a linear form {var: coeff} in decision
    variables; ``const`` is the opponent's contribution.  Adds the valid
    cut 0 <= s - t <= 2, sharpened to the clip range of the score's
    interval bounds (``pi_lo``/``pi_hi``, in clamp units) when given;
    both hold at every integer-feasible point.  Indicators whose argument
    range already decides the max are pinned outright.
    """
    s = lp.add_var(obj=prob_k, name=f"s{len(binaries)}")
    t = lp.add_var(obj=-prob_k, name=f"t{len(binaries)}")
    z = lp.add_var(ub=1.0, name=f"z{len(binaries)}")
    w = lp.add_var(ub=1.0, name=f"w{len(binaries)}")
    binaries.update((z, w))
    if pi_lo is not None:
        _fix_indicator(lp, z, pi_lo + 1.0, pi_hi + 1.0)
        _fix_indicator(lp, w, pi_lo - 1.0, pi_hi - 1.0)
    inv = 1.0 / c
    # s = max((pi - const + c)/c, 0)
    lp.add_row({s: 1.0, **{v: -inv * a for v, a in expr.items()}}, GE, (c - const) * inv)
    lp.add_row({s: 1.0, **{v: -inv * a for v, a in expr.items()}, z: u_s}, LE, (c - const) * inv + u_s)
    lp.add_row({s: 1.0, z: -u_s}, LE, 0.0)
    # t = max((pi - const - c)/c, 0)
    lp.add_row({t: 1.0, **{v: -inv * a for v, a in expr.items()}}, GE, (-c - const) * inv)
    lp.add_row({t: 1.0, **{v: -inv * a for v, a in expr.items()}, w: u_t}, LE, (-c - const) * inv + u_t)
    lp.add_row({t: 1.0, w: -u_t}, LE, 0.0)
    cut_lo = 1.0 + min(1.0, max(-1.0, pi_lo)) if pi_lo is not None else 0.0
    cut_hi = 1.0 + min(1.0, max(-1.0, pi_hi)) if pi_hi is not None else 2.0
    lp.add_row({s: 1.0, t: -1.0}, GE, cut_lo)
    lp.add_row({s: 1.0, t: -1.0}, LE, cut_hi)
    if pi_lo is not None:
        # concave-envelope (secant) upper bound on s = max(f_s, 0): the
        # big-M rows alone leave the relaxation vacuous at fractional z
        f_lo, f_hi = pi_lo + 1.0, pi_hi + 1.0
        if f_lo < -1e-9 and f_hi > 1e-9:
            alpha = f_hi / (f_hi - f_lo)
            lp.add_row(
                {s: 1.0, **{v: -alpha * inv * a for v, a in expr.items()}},
                LE,
                alpha * (1.0 - inv * const - f_lo),
            )
    return {"s": s, "t": t, "z": z, "w": w}


def formulate_homogeneous_br(p: BestResponseProblem) -> BrFormulation:
    if p.rules.mode == "cdh":
        raise BestResponseError("homogeneous formulation called with cyclic rules")
    if p.reachable.type_count != 1:
        raise BestResponseError("homogeneous play has a single robot type")
    c = p.rules.threshold
    lp = LinearProgram("max", "best-response")
    lambda_slices, strategy_vars = _add_common_structure(p, lp)
    box_lo, box_hi = _strategy_box(p.reachable)
    binaries: set[int] = set()
    pair_vars = {}
    n = p.reachable.node_count
    for j in range(n):
        # opponent strategies with the same allocation at this node share
        # one clamp block with their probabilities pooled
        blocks: dict[float, float] = {}
        for sy, pk in zip(p.opponent_mix.strategies, p.opponent_mix.probabilities):
            key = round(float(sy.reshape(-1)[j]), 12)
            blocks[key] = blocks.get(key, 0.0) + float(pk)
        for b, (sy_j, weight) in enumerate(sorted(blocks.items())):
            expr = {int(strategy_vars[0, j]): 1.0}
            lo = (box_lo[0, j] - sy_j) / c
            hi = (box_hi[0, j] - sy_j) / c
            u_s = _tight_m(lo + 1.0, hi + 1.0)
            u_t = _tight_m(lo - 1.0, hi - 1.0)
            vs = _add_clamp_pair(
                lp, binaries, weight, c, u_s, u_t, expr, sy_j, pi_lo=lo, pi_hi=hi
            )
            vs.update({"weight": weight, "const": sy_j})
            pair_vars[(j, b)] = vs
    problem = MilpProblem(lp, frozenset(binaries))
    return BrFormulation(
        problem, lambda_slices, strategy_vars, pair_vars, -float(n), p.reachable, p.rules, p.opponent_mix
    )


def formulate_cdh_br(p: BestResponseProblem) -> BrFormulation:
    if p.rules.mode != "cdh":
        raise BestResponseError("cyclic formulation needs cyclic rules")
    if p.reachable.type_count != 3:
        raise BestResponseError("cyclic play needs exactly 3 robot types")
    c = p.rules.threshold
    g = g_coefficients(p.rules.intrinsic)
    g21c, g13c, g23c = g[1] - g[0], g[0] - g[2], g[1] - g[2]
    lp = LinearProgram("max", "best-response")
    lambda_slices, strategy_vars = _add_common_structure(p, lp)
    box_lo, box_hi = _strategy_box(p.reachable)
    var_range = {
        int(strategy_vars[i, j]): (float(box_lo[i, j]), float(box_hi[i, j]))
        for i in range(3)
        for j in range(p.reachable.node_count)
    }
    binaries: set[int] = set()
    pair_vars = {}
    n = p.reachable.node_count

    def form(coeffs: np.ndarray, j: int) -> dict[int, float]:
        return {int(strategy_vars[i, j]): float(coeffs[i]) for i in range(3)}

    def add_two_max(prob_expr1, const1, expr2, const2, tag):
        """p = max(f1, f2, 0) as delta = max(f1, 0) then p = max(delta, f2).

        Indicator constants are interval bounds of the forms over the
        reachable box, computed per instance.
        """
        f1_lo, f1_hi = _expr_range(prob_expr1, var_range, const1)
        f2_lo, f2_hi = _expr_range(expr2, var_range, const2)
        d_lo, d_hi = max(f1_lo, 0.0), max(f1_hi, 0.0)
        u_d = _tight_m(f1_lo, f1_hi)
        u_pq = max(max(f2_hi - d_lo, 0.0), max(d_hi - f2_lo, 0.0), 1e-6)
        d = lp.add_var(name=f"d{tag}")
        pv = lp.add_var(lb=-np.inf, name=f"p{tag}")
        zd = lp.add_var(ub=1.0, name=f"zd{tag}")
        zp = lp.add_var(ub=1.0, name=f"zp{tag}")
        binaries.update((zd, zp))
        _fix_indicator(lp, zd, f1_lo, f1_hi)
        if d_lo >= f2_hi:
            lp.lb[zp] = 1.0
        elif f2_lo >= d_hi:
            lp.ub[zp] = 0.0
        lp.add_row({d: 1.0, zd: -u_d}, LE, 0.0)
        lp.add_row({d: 1.0, **{v: -a for v, a in prob_expr1.items()}}, GE, const1)
        lp.add_row({d: 1.0, **{v: -a for v, a in prob_expr1.items()}, zd: u_d}, LE, const1 + u_d)
        lp.add_row({pv: 1.0, d: -1.0}, GE, 0.0)
        lp.add_row({pv: 1.0, d: -1.0, zp: u_pq}, LE, u_pq)
        lp.add_row({pv: 1.0, **{v: -a for v, a in expr2.items()}}, GE, const2)
        lp.add_row({pv: 1.0, **{v: -a for v, a in expr2.items()}, zp: -u_pq}, LE, const2)
        # concave-envelope secants: d <= sec(f1) over [f1_lo, f1_hi] and
        # p <= d + sec(f2 - d) over the difference range
        if f1_lo < -1e-9 and f1_hi > 1e-9:
            alpha = f1_hi / (f1_hi - f1_lo)
            lp.add_row(
                {d: 1.0, **{v: -alpha * a for v, a in prob_expr1.items()}},
                LE,
                alpha * (const1 - f1_lo),
            )
        r_lo, r_hi = f2_lo - d_hi, f2_hi - d_lo
        if r_lo < -1e-9 and r_hi > 1e-9:
            beta = r_hi / (r_hi - r_lo)
            lp.add_row(
                {pv: 1.0, d: -(1.0 - beta), **{v: -beta * a for v, a in expr2.items()}},
                LE,
                beta * (const2 - r_lo),
            )
        var_range[pv] = (max(d_lo, f2_lo), max(d_hi, f2_hi))
        return d, pv, zd, zp

    for j in range(n):
        # pool opponent strategies whose conversion-form constants agree
        # at this node; each distinct triple gets one linearized block
        blocks: dict[tuple, tuple[np.ndarray, float]] = {}
        for sy, pk in zip(p.opponent_mix.strategies, p.opponent_mix.probabilities):
            consts = g @ sy[:, j]
            key = tuple(np.round(consts, 12))
            prev = blocks.get(key)
            blocks[key] = (consts, (prev[1] if prev else 0.0) + float(pk))
        for b, key in enumerate(sorted(blocks)):
            consts, weight = blocks[key]
            c21 = float(consts[1] - consts[0])
            c13 = float(consts[0] - consts[2])
            c23 = float(consts[1] - consts[2])
            tag = f"_{j}_{b}"
            dp, pvar, zdp, zp = add_two_max(
                form(g21c, j), -c21, form(g23c, j), -c23, "P" + tag
            )
            dq, qvar, zdq, zq = add_two_max(
                form(g13c, j), -c13, form(g23c, j), -c23, "Q" + tag
            )
            # pi = g1(S_x) - g1(S_y) + p - q feeds the clamp pair
            expr = form(g[0], j)
            expr[pvar] = expr.get(pvar, 0.0) + 1.0
            expr[qvar] = expr.get(qvar, 0.0) - 1.0
            pi_lo, pi_hi = _expr_range(expr, var_range, -float(consts[0]))
            u_s = _tight_m(pi_lo / c + 1.0, pi_hi / c + 1.0)
            u_t = _tight_m(pi_lo / c - 1.0, pi_hi / c - 1.0)
            vs = _add_clamp_pair(
                lp, binaries, weight, c, u_s, u_t, expr, float(consts[0]),
                pi_lo=pi_lo / c, pi_hi=pi_hi / c,
            )
            vs.update({"dp": dp, "p": pvar, "zdp": zdp, "zp": zp,
                       "dq": dq, "q": qvar, "zdq": zdq, "zq": zq,
                       "weight": weight, "consts": consts})
            pair_vars[(j, b)] = vs
    problem = MilpProblem(lp, frozenset(binaries))
    return BrFormulation(
        problem, lambda_slices, strategy_vars, pair_vars, -float(n), p.reachable, p.rules, p.opponent_mix
    )


def formulate_br(p: BestResponseProblem) -> BrFormulation:
    if p.rules.mode == "cdh":
        return formulate_cdh_br(p)
    return formulate_homogeneous_br(p)


def _seed_candidates(form: BrFormulation) -> tuple[float, np.ndarray] | None:
    """Deterministic incumbent from a sweep over vertex-weight combinations."""
    sizes = [r.shape[0] for r in form.reachable.vertices]
    combos: list[tuple[int, ...]]
    if int(np.prod(sizes)) <= 512:
        combos = list(itertools.product(*[range(s) for s in sizes]))
    else:
        top = max(sizes)
        combos = [tuple(min(v, s - 1) for s in sizes) for v in range(top)]
    best = None
    for combo in combos:
        lams = []
        for i, s in enumerate(sizes):
            lam = np.zeros(s)
            lam[combo[i]] = 1.0
            lams.append(lam)
        obj, x = form.assignment_for(lams)
        if best is None or obj > best[0]:
            best = (obj, x)
    return best


def solve_br(
    p: BestResponseProblem,
    gap_tol: float = 1e-6,
    node_limit: int = 10**6,
    external_command: str | None = None,
) -> tuple[np.ndarray, float, bool]:
    """Exact best response: (strategy, expected utility, certified flag).

    ``external_command`` routes the MILP through an external solver via
    an MPS file instead of the built-in branch and bound.
    """
    form = formulate_br(p)
    if external_command is not None:
        res = solve_via_external(form.problem, external_command)
    else:
        hint = _seed_candidates(form)
        res = solve_milp(form.problem, gap_tol=gap_tol, node_limit=node_limit, incumbent_hint=hint)
    if res.status not in ("optimal", "iteration_limit"):
        raise BestResponseError(f"best-response MILP failed: {res.status}")
    strategy = form.extract_strategy(res.x)
    value = p.opponent_mix.expected_against(strategy, p.rules, role="y")
    return strategy, value, res.status == "optimal"


def _type_lattice(vertices: np.ndarray, denominator: int) -> np.ndarray:
    """Deduplicated images of the weight lattice with the given denominator."""
    v = vertices.shape[0]
    count = math.comb(denominator + v - 1, v - 1)
    if count > GRID_LIMIT:
        raise BestResponseError(f"per-type lattice too large ({count} points)")
    points = []
    for cuts in itertools.combinations(range(denominator + v - 1), v - 1):
        prev = -1
        lam = []
        for cut in cuts:
            lam.append(cut - prev - 1)
            prev = cut
        lam.append(denominator + v - 2 - prev)
        points.append(np.array(lam, dtype=float) / denominator)
    images = np.array(points) @ vertices
    order = np.lexsort(images.T[::-1])
    images = images[order]
    keep = [images[0]]
    for row in images[1:]:
        if np.any(np.abs(row - keep[-1]) > 1e-12):
            keep.append(row)
    return np.array(keep)


def grid_oracle_br(
    p: BestResponseProblem, cfg: GridOracleConfig = GridOracleConfig()
) -> tuple[np.ndarray, float]:
    """Exhaustive lower-bounding sweep over the per-type weight lattices."""
    grids = [_type_lattice(v, cfg.denominator) for v in p.reachable.vertices]
    total = int(np.prod([g.shape[0] for g in grids]))
    if total > GRID_LIMIT:
        raise BestResponseError(f"joint lattice too large ({total} points)")
    m, n = p.reachable.type_count, p.reachable.node_count
    index_iter = itertools.product(*[range(g.shape[0]) for g in grids])
    best_val = -np.inf
    best_s = None
    batch = 20000
    while True:
        chunk = list(itertools.islice(index_iter, batch))
        if not chunk:
            break
        s_batch = np.empty((len(chunk), m, n))
        for r, combo in enumerate(chunk):
            for i in range(m):
                s_batch[r, i] = grids[i][combo[i]]
        vals = np.zeros(len(chunk))
        for sy, pk in zip(p.opponent_mix.strategies, p.opponent_mix.probabilities):
            vals += pk * p.rules.utility_batch(s_batch, sy if m > 1 else sy.reshape(1, -1))
        r = int(np.argmax(vals))
        if vals[r] > best_val:
            best_val = float(vals[r])
            best_s = s_batch[r].copy()
    return best_s, best_val

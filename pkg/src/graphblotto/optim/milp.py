"""Branch-and-bound over binary variables with LP relaxation bounds.

Depth-first search branching on the most fractional binary (ties to the
lowest index), with an incumbent seeded by rounding the root relaxation.
The returned objective is certified to be within ``gap_tol`` of the true
optimum by the tree's best bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from graphblotto.optim.lp import LinearProgram, LpError, SolveResult, solve_lp

_INT_TOL = 1e-6


@dataclass
class MilpProblem:
    base: LinearProgram
    binary_vars: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        self.binary_vars = frozenset(self.binary_vars)
        for j in self.binary_vars:
            if not 0 <= j < self.base.n_vars:
                raise LpError(f"binary index {j} out of range")
            if self.base.lb[j] < -1e-12 or self.base.ub[j] > 1 + 1e-12:
                raise LpError(f"binary variable {j} must be bounded in [0, 1]")


def _apply_fixes(lp: LinearProgram, fixes: dict[int, int]) -> LinearProgram:
    sub = lp.copy()
    for j, v in fixes.items():
        sub.lb[j] = float(v)
        sub.ub[j] = float(v)
    return sub


def _fractional(x: np.ndarray, binaries: list[int]) -> list[tuple[float, int]]:
    out = []
    for j in binaries:
        f = abs(x[j] - round(x[j]))
        if f > _INT_TOL:
            out.append((f, j))
    return out


def solve_milp(
    problem: MilpProblem,
    gap_tol: float = 1e-6,
    node_limit: int = 10**6,
    incumbent_hint: tuple[float, np.ndarray] | None = None,
) -> SolveResult:
    """Maximize/minimize the MILP; ``incumbent_hint`` optionally warm-starts
    the incumbent with a known feasible (objective, assignment) pair."""
    lp = problem.base
    binaries = sorted(problem.binary_vars)
    sgn = 1.0 if lp.sense == "max" else -1.0

    def key(v: float) -> float:  # internal maximization
        return sgn * v

    root = solve_lp(lp)
    if root.status in ("infeasible", "unbounded", "iteration_limit"):
        return root
    if not binaries:
        return root

    inc_x: np.ndarray | None = None
    inc_val = -np.inf  # in key units
    if incumbent_hint is not None:
        inc_val = key(incumbent_hint[0])
        inc_x = np.asarray(incumbent_hint[1], dtype=float)

    # seed: round the relaxation's binaries and repair with an LP re-solve
    frac = _fractional(root.x, binaries)
    if not frac:
        if key(root.objective) > inc_val:
            inc_val, inc_x = key(root.objective), root.x
        return SolveResult("optimal", sgn * inc_val, inc_x, gap=0.0, nodes=1)
    seed_fix = {j: int(round(root.x[j])) for j in binaries}
    seeded = solve_lp(_apply_fixes(lp, seed_fix))
    if seeded.is_optimal and key(seeded.objective) > inc_val:
        inc_val, inc_x = key(seeded.objective), seeded.x

    # DFS stack of (parent bound in key units, fixes); explore rounded side first
    stack: list[tuple[float, dict[int, int]]] = []
    root_bound = key(root.objective)
    _, j0 = max(frac, key=lambda t: (t[0], -t[1]))
    r0 = int(round(root.x[j0]))
    stack.append((root_bound, {j0: 1 - r0}))
    stack.append((root_bound, {j0: r0}))

    nodes = 1
    pruned_bound = -np.inf  # best key-bound discarded by the gap rule
    while stack:
        if nodes >= node_limit:
            open_bound = max([b for b, _ in stack] + [pruned_bound, inc_val])
            gap = max(0.0, open_bound - inc_val)
            status = "iteration_limit" if gap > gap_tol else "optimal"
            return SolveResult(status, sgn * inc_val, inc_x, gap=gap, nodes=nodes)
        parent_bound, fixes = stack.pop()
        if parent_bound <= inc_val + gap_tol:
            pruned_bound = max(pruned_bound, parent_bound)
            continue
        res = solve_lp(_apply_fixes(lp, fixes))
        nodes += 1
        if not res.is_optimal:
            continue
        bound = key(res.objective)
        if bound <= inc_val + gap_tol:
            pruned_bound = max(pruned_bound, bound)
            continue
        frac = _fractional(res.x, [j for j in binaries if j not in fixes])
        if not frac:
            inc_val, inc_x = bound, res.x
            continue
        _, j = max(frac, key=lambda t: (t[0], -t[1]))
        r = int(round(res.x[j]))
        stack.append((bound, {**fixes, j: 1 - r}))
        stack.append((bound, {**fixes, j: r}))

    if inc_x is None:
        return SolveResult("infeasible", np.nan, np.full(lp.n_vars, np.nan), nodes=nodes)
    gap = max(0.0, pruned_bound - inc_val)
    x = inc_x.copy()
    for j in binaries:
        x[j] = round(x[j])
    return SolveResult("optimal", sgn * inc_val, x, gap=gap, nodes=nodes)

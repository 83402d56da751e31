"""Dense two-phase simplex for general-form linear programs.

The solver accepts maximization or minimization over variables with
arbitrary (possibly infinite) bounds and <=, =, >= rows.  Internally the
program is rewritten into standard form (nonnegative variables, equality
rows, rhs >= 0) and solved with a tableau simplex.  Pivoting uses
Dantzig's rule with an automatic, permanent switch to Bland's rule when
the objective stalls, which keeps runs deterministic and cycle-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LE = "<="
EQ = "="
GE = ">="

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7


class LpError(Exception):
    """Malformed program or internal solver failure."""


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    objective: float
    x: np.ndarray
    gap: float = 0.0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class LinearProgram:
    """Mutable builder for an LP: objective sense, rows, and variable bounds."""

    def __init__(self, sense: str = "max", name: str = "lp"):
        if sense not in ("max", "min"):
            raise LpError(f"unknown sense {sense!r}")
        self.sense = sense
        self.name = name
        self.obj: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.var_names: list[str] = []
        # each row: (dense-or-sparse coeffs as dict, relation, rhs)
        self.rows: list[tuple[dict[int, float], str, float]] = []

    @property
    def n_vars(self) -> int:
        return len(self.obj)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(
        self,
        obj: float = 0.0,
        lb: float = 0.0,
        ub: float = np.inf,
        name: str | None = None,
    ) -> int:
        if lb > ub:
            raise LpError(f"variable lower bound {lb} exceeds upper bound {ub}")
        idx = len(self.obj)
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.var_names.append(name if name is not None else f"X{idx}")
        return idx

    def add_row(self, coeffs: dict[int, float], rel: str, rhs: float) -> int:
        if rel not in (LE, EQ, GE):
            raise LpError(f"unknown relation {rel!r}")
        n = self.n_vars
        for j in coeffs:
            if not 0 <= j < n:
                raise LpError(f"row references unknown variable index {j}")
        self.rows.append((dict(coeffs), rel, float(rhs)))
        return len(self.rows) - 1

    def copy(self) -> "LinearProgram":
        other = LinearProgram(self.sense, self.name)
        other.obj = list(self.obj)
        other.lb = list(self.lb)
        other.ub = list(self.ub)
        other.var_names = list(self.var_names)
        other.rows = [(dict(c), rel, rhs) for c, rel, rhs in self.rows]
        return other


def _standardize(lp: LinearProgram):
    """Rewrite into max c.y, rows A y (rel) b with y >= 0 and all-finite data.

    Returns (A, b, rels, c, recover) where recover maps a standard-form
    point back onto the original variables.
    """
    n = lp.n_vars
    lb = np.asarray(lp.lb)
    ub = np.asarray(lp.ub)
    # per original variable: list of (std_col, sign) plus constant offset
    col_of: list[list[tuple[int, float]]] = []
    offset = np.zeros(n)
    extra_rows: list[tuple[dict[int, float], str, float]] = []
    n_std = 0
    for j in range(n):
        l, u = lb[j], ub[j]
        if np.isfinite(l) and np.isfinite(u) and u - l <= 1e-12:
            # pinned variable: fold into the constant offset, no column
            col_of.append([])
            offset[j] = l
        elif np.isfinite(l):
            col_of.append([(n_std, 1.0)])
            offset[j] = l
            if np.isfinite(u):
                extra_rows.append(({n_std: 1.0}, LE, u - l))
            n_std += 1
        elif np.isfinite(u):
            col_of.append([(n_std, -1.0)])
            offset[j] = u
            n_std += 1
        else:
            col_of.append([(n_std, 1.0), (n_std + 1, -1.0)])
            n_std += 2

    sign = 1.0 if lp.sense == "max" else -1.0
    c = np.zeros(n_std)
    for j, cj in enumerate(lp.obj):
        for col, s in col_of[j]:
            c[col] += sign * cj * s

    rows = []
    for coeffs, rel, rhs in lp.rows:
        r = np.zeros(n_std)
        adj = rhs
        for j, a in coeffs.items():
            adj -= a * offset[j]
            for col, s in col_of[j]:
                r[col] += a * s
        rows.append((r, rel, adj))
    for coeffs, rel, rhs in extra_rows:
        r = np.zeros(n_std)
        for col, a in coeffs.items():
            r[col] = a
        rows.append((r, rel, rhs))

    m = len(rows)
    A = np.zeros((m, n_std))
    b = np.zeros(m)
    rels = []
    for i, (r, rel, rhs) in enumerate(rows):
        if rhs < 0:
            r = -r
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        A[i] = r
        b[i] = rhs
        rels.append(rel)

    def recover(y: np.ndarray) -> np.ndarray:
        x = offset.copy()
        for j in range(n):
            for col, s in col_of[j]:
                x[j] += s * y[col]
        return x

    return A, b, rels, c, n_std, recover


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row + 1] /= T[row + 1, col]
    piv = T[row + 1]
    factors = T[:, col].copy()
    factors[row + 1] = 0.0
    T -= np.outer(factors, piv)
    basis[row] = col


def _run_simplex(T, basis, allowed, max_iter, tol):
    """Drive the tableau to optimality over the allowed columns.

    Row 0 holds z_j - c_j (optimal when all >= -tol).  Returns
    ('optimal'|'unbounded'|'iteration_limit', pivots used).
    """
    m = T.shape[0] - 1
    stall = 0
    stall_limit = 2 * (m + T.shape[1]) + 100
    use_bland = False
    last_obj = T[0, -1]
    for it in range(max_iter):
        red = T[0, :-1]
        cand = np.where(allowed & (red < -tol))[0]
        if cand.size == 0:
            return "optimal", it
        if use_bland:
            col = cand[0]
        else:
            col = cand[np.argmin(red[cand])]
        colvals = T[1:, col]
        pos = np.where(colvals > tol)[0]
        if pos.size == 0:
            return "unbounded", it
        ratios = T[1 + pos, -1] / colvals[pos]
        rmin = ratios.min()
        ties = pos[np.where(ratios <= rmin + tol)[0]]
        # Bland-compatible tie break: leave the basic var with lowest index
        row = ties[np.argmin(basis[ties])]
        _pivot(T, basis, row, col)
        obj = T[0, -1]
        if obj > last_obj + tol:
            stall = 0
            last_obj = obj
        else:
            stall += 1
            if stall > stall_limit:
                use_bland = True
    return "iteration_limit", max_iter


def solve_lp(lp: LinearProgram, tol: float = _PIVOT_TOL, max_iter: int | None = None) -> SolveResult:
    """Solve an LP to a basic optimal solution, or report infeasible/unbounded."""
    A, b, rels, c, n_std, recover = _standardize(lp)
    m = A.shape[0]
    if max_iter is None:
        max_iter = 500 + 100 * (m + n_std)

    if m == 0:
        # only bound-free structure: optimum at y = 0 unless a payoff ray exists
        if np.any(c > tol):
            return SolveResult("unbounded", np.inf if lp.sense == "max" else -np.inf, recover(np.zeros(n_std)))
        x = recover(np.zeros(n_std))
        return SolveResult("optimal", float(np.dot(lp.obj, x)), x)

    n_slack = sum(1 for r in rels if r == LE)
    n_surp = sum(1 for r in rels if r == GE)
    n_art = sum(1 for r in rels if r in (GE, EQ))
    width = n_std + n_slack + n_surp + n_art + 1

    T = np.zeros((m + 1, width))
    T[1:, :n_std] = A
    T[1:, -1] = b
    basis = np.zeros(m, dtype=int)
    s_at = n_std
    a_at = n_std + n_slack + n_surp
    art_cols = []
    for i, rel in enumerate(rels):
        if rel == LE:
            T[i + 1, s_at] = 1.0
            basis[i] = s_at
            s_at += 1
        elif rel == GE:
            T[i + 1, s_at] = -1.0
            s_at += 1
            T[i + 1, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1
        else:
            T[i + 1, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1

    art_cols = np.array(art_cols, dtype=int)
    allowed = np.ones(width - 1, dtype=bool)

    if art_cols.size:
        # phase 1: maximize -(sum of artificials)
        T[0, :] = 0.0
        T[0, art_cols] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                T[0] -= T[i + 1]
        status, _ = _run_simplex(T, basis, allowed, max_iter, tol)
        if status == "iteration_limit":
            return SolveResult("iteration_limit", np.nan, np.full(lp.n_vars, np.nan))
        if T[0, -1] < -_FEAS_TOL:
            return SolveResult("infeasible", np.nan, np.full(lp.n_vars, np.nan))
        # drive any zero-valued artificials out of the basis
        art_set = set(art_cols.tolist())
        for i in range(m):
            if basis[i] in art_set:
                row = T[i + 1, : width - 1]
                pivots = np.where((np.abs(row) > tol) & allowed)[0]
                pivots = [j for j in pivots if j not in art_set]
                if pivots:
                    _pivot(T, basis, i, pivots[0])
                # else: redundant row; artificial stays basic at value 0
        allowed[art_cols] = False

    # phase 2: price out the true objective over the current basis
    T[0, :] = 0.0
    T[0, :n_std] = -c
    for i in range(m):
        if T[0, basis[i]] != 0.0:
            T[0] -= T[0, basis[i]] * T[i + 1]
    status, _ = _run_simplex(T, basis, allowed, max_iter, tol)
    if status == "iteration_limit":
        return SolveResult("iteration_limit", np.nan, np.full(lp.n_vars, np.nan))
    if status == "unbounded":
        val = np.inf if lp.sense == "max" else -np.inf
        return SolveResult("unbounded", val, np.full(lp.n_vars, np.nan))

    y = np.zeros(width - 1)
    y[basis] = T[1:, -1]
    x = recover(y[:n_std])
    return SolveResult("optimal", float(np.dot(lp.obj, x)), x)

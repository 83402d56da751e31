"""External MILP backend: solve an MPS file with scipy's HiGHS wrapper.

Usage: python external_milp_solver.py PROBLEM.mps SOLUTION.txt

Writes one "name value" line per variable, the interface expected by
``graphblotto.optim.solve_via_external``.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

from graphblotto.optim import EQ, GE, LE
from graphblotto.optim.mps import parse_mps


def main(mps_path, sol_path):
    with open(mps_path) as fh:
        problem = parse_mps(fh)
    lp = problem.base
    n = lp.n_vars
    m = lp.n_rows
    a = lil_matrix((m, n))
    lo = np.empty(m)
    hi = np.empty(m)
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        for j, v in coeffs.items():
            a[i, j] = v
        lo[i] = rhs if rel in (EQ, GE) else -np.inf
        hi[i] = rhs if rel in (EQ, LE) else np.inf
    sign = 1.0 if lp.sense == "min" else -1.0
    integrality = np.zeros(n)
    for j in problem.binary_vars:
        integrality[j] = 1
    res = milp(
        c=sign * np.asarray(lp.obj),
        constraints=LinearConstraint(a.tocsr(), lo, hi),
        integrality=integrality,
        bounds=Bounds(np.asarray(lp.lb), np.asarray(lp.ub)),
        options={"mip_rel_gap": 1e-6},
    )
    if not res.success:
        raise SystemExit(f"milp failed: {res.status} {res.message}")
    with open(sol_path, "w") as fh:
        for name, value in zip(lp.var_names, res.x):
            fh.write(f"{name} {float(value)!r}\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])

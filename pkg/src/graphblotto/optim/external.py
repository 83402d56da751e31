"""Optional external MILP backend driven through an MPS file on disk.

The hook runs ``command <problem.mps> <solution.txt>`` and expects the
solution file to hold one ``variable_name value`` pair per line.  Missing
variables default to zero.
"""

from __future__ import annotations

import subprocess
import tempfile
from pathlib import Path

import numpy as np

from graphblotto.optim.lp import LpError, SolveResult
from graphblotto.optim.milp import MilpProblem
from graphblotto.optim.mps import emit_mps


def solve_via_external(problem: MilpProblem, command: str, timeout: float | None = None) -> SolveResult:
    lp = problem.base
    with tempfile.TemporaryDirectory(prefix="graphblotto-") as tmp:
        mps_path = Path(tmp) / "problem.mps"
        sol_path = Path(tmp) / "solution.txt"
        with open(mps_path, "w") as fh:
            emit_mps(problem, fh)
        proc = subprocess.run(
            [*command.split(), str(mps_path), str(sol_path)],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
        if proc.returncode != 0 or not sol_path.exists():
            raise LpError(f"external solver failed (rc={proc.returncode}): {proc.stderr.strip()}")
        values: dict[str, float] = {}
        for line in sol_path.read_text().splitlines():
            parts = line.split()
            if len(parts) == 2:
                values[parts[0]] = float(parts[1])
    x = np.array([values.get(name, 0.0) for name in lp.var_names])
    return SolveResult("optimal", float(np.dot(lp.obj, x)), x)

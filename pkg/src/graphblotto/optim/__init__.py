"""Self-contained optimization engines: dense simplex, branch-and-bound, MPS export."""

from graphblotto.optim.lp import (
    EQ,
    GE,
    LE,
    LinearProgram,
    LpError,
    SolveResult,
    solve_lp,
)
from graphblotto.optim.milp import MilpProblem, solve_milp
from graphblotto.optim.mps import emit_mps, parse_mps
from graphblotto.optim.external import solve_via_external

__all__ = [
    "LE",
    "EQ",
    "GE",
    "LinearProgram",
    "LpError",
    "SolveResult",
    "solve_lp",
    "MilpProblem",
    "solve_milp",
    "emit_mps",
    "parse_mps",
    "solve_via_external",
]

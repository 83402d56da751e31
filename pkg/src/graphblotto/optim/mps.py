"""Fixed-format MPS emission (and a parser for the round-trip/backend path).

MPS has no objective-sense record, so maximization problems are written
with a negated objective and a comment noting the flip; consumers of the
file solve a minimization and callers negate the reported value back.
"""

from __future__ import annotations

import math
from typing import IO

import numpy as np

from graphblotto.optim.lp import EQ, GE, LE, LinearProgram, LpError
from graphblotto.optim.milp import MilpProblem

_OBJ_ROW = "COST"
_REL_CODE = {LE: "L", GE: "G", EQ: "E"}
_CODE_REL = {v: k for k, v in _REL_CODE.items()}


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _field(line_parts: list[str]) -> str:
    # fixed-format field columns: 2, 5, 15, 25, 40, 50 (1-based)
    starts = [1, 4, 14, 24, 39, 49]
    out = ""
    for start, part in zip(starts, line_parts):
        if part and len(out) >= start and out:
            out += " "
        out += " " * max(0, start - len(out)) + part
    return out


def emit_mps(problem: MilpProblem | LinearProgram, destination: IO[str]) -> None:
    """Write the problem as fixed-format MPS with BV markers for binaries."""
    if isinstance(problem, LinearProgram):
        problem = MilpProblem(problem, frozenset())
    lp = problem.base
    w = destination.write
    w(f"NAME          {lp.name.upper()[:8] or 'PROBLEM'}\n")
    if lp.sense == "max":
        w("* objective negated: source problem maximizes\n")
    osign = -1.0 if lp.sense == "max" else 1.0

    row_names = [f"R{i}" for i in range(lp.n_rows)]
    w("ROWS\n")
    w(_field(["N", _OBJ_ROW]) + "\n")
    for name, (_, rel, _) in zip(row_names, lp.rows):
        w(_field([_REL_CODE[rel], name]) + "\n")

    # column-major entries
    entries: list[list[tuple[str, float]]] = [[] for _ in range(lp.n_vars)]
    for j, cj in enumerate(lp.obj):
        if cj != 0.0:
            entries[j].append((_OBJ_ROW, osign * cj))
    for name, (coeffs, _, _) in zip(row_names, lp.rows):
        for j, a in coeffs.items():
            if a != 0.0:
                entries[j].append((name, a))

    w("COLUMNS\n")
    in_int = False
    marker = 0
    for j in range(lp.n_vars):
        is_bin = j in problem.binary_vars
        if is_bin != in_int:
            kind = "'INTORG'" if is_bin else "'INTEND'"
            w(_field(["", f"M{marker}", "'MARKER'", "", kind]) + "\n")
            marker += 1
            in_int = is_bin
        col = lp.var_names[j]
        pairs = entries[j] or [(_OBJ_ROW, 0.0)]
        for k in range(0, len(pairs), 2):
            chunk = pairs[k : k + 2]
            parts = ["", col]
            for rname, val in chunk:
                parts += [rname, _fmt(val)]
            w(_field(parts) + "\n")
    if in_int:
        w(_field(["", f"M{marker}", "'MARKER'", "", "'INTEND'"]) + "\n")

    w("RHS\n")
    for name, (_, _, rhs) in zip(row_names, lp.rows):
        if rhs != 0.0:
            w(_field(["", "RHS", name, _fmt(rhs)]) + "\n")

    w("BOUNDS\n")
    for j in range(lp.n_vars):
        col = lp.var_names[j]
        if j in problem.binary_vars:
            w(_field(["BV", "BND", col]) + "\n")
            continue
        lo, hi = lp.lb[j], lp.ub[j]
        if lo == 0.0 and math.isinf(hi):
            continue  # default bounds
        if math.isinf(lo) and math.isinf(hi):
            w(_field(["FR", "BND", col]) + "\n")
            continue
        if lo == hi:
            w(_field(["FX", "BND", col, _fmt(lo)]) + "\n")
            continue
        if math.isinf(lo):
            w(_field(["MI", "BND", col]) + "\n")
        elif lo != 0.0:
            w(_field(["LO", "BND", col, _fmt(lo)]) + "\n")
        if not math.isinf(hi):
            w(_field(["UP", "BND", col, _fmt(hi)]) + "\n")
    w("ENDATA\n")


def parse_mps(source: IO[str]) -> MilpProblem:
    """Parse an MPS file of the dialect written by :func:`emit_mps`.

    The result is always a minimization (MPS convention); the negation
    comment, if present, is the caller's cue to flip reported objectives.
    """
    lp = LinearProgram("min", "parsed")
    section = None
    rel_of: dict[str, str] = {}
    order: list[str] = []
    obj_row = None
    cols: dict[str, int] = {}
    col_entries: dict[str, dict[str, float]] = {}
    binaries: set[str] = set()
    rhs: dict[str, float] = {}
    bounds: list[tuple[str, str, float | None]] = []
    in_int = False

    for raw in source:
        line = raw.rstrip("\n")
        if not line or line.startswith("*"):
            continue
        if not line[0].isspace():
            section = line.split()[0]
            if section == "NAME":
                parts = line.split()
                lp.name = parts[1].lower() if len(parts) > 1 else "parsed"
            continue
        parts = line.split()
        if section == "ROWS":
            code, name = parts[0], parts[1]
            if code == "N":
                obj_row = name
            else:
                rel_of[name] = _CODE_REL[code]
                order.append(name)
        elif section == "COLUMNS":
            if "'MARKER'" in parts:
                in_int = parts[-1] == "'INTORG'"
                continue
            col = parts[0]
            if col not in cols:
                cols[col] = lp.add_var(name=col)
                col_entries[col] = {}
                if in_int:
                    binaries.add(col)
            for rname, val in zip(parts[1::2], parts[2::2]):
                if rname == obj_row:
                    lp.obj[cols[col]] = float(val)
                else:
                    col_entries[col][rname] = float(val)
        elif section == "RHS":
            for rname, val in zip(parts[1::2], parts[2::2]):
                rhs[rname] = float(val)
        elif section == "RANGES":
            raise LpError("RANGES section not supported")
        elif section == "BOUNDS":
            code, col = parts[0], parts[2]
            val = float(parts[3]) if len(parts) > 3 else None
            bounds.append((code, col, val))

    for rname in order:
        coeffs = {
            cols[c]: entries[rname]
            for c, entries in col_entries.items()
            if rname in entries
        }
        lp.add_row(coeffs, rel_of[rname], rhs.get(rname, 0.0))

    for code, col, val in bounds:
        j = cols[col]
        if code == "BV":
            lp.lb[j], lp.ub[j] = 0.0, 1.0
            binaries.add(col)
        elif code == "UP":
            lp.ub[j] = val
        elif code == "LO":
            lp.lb[j] = val
        elif code == "FX":
            lp.lb[j] = lp.ub[j] = val
        elif code == "FR":
            lp.lb[j], lp.ub[j] = -np.inf, np.inf
        elif code == "MI":
            lp.lb[j] = -np.inf
        else:
            raise LpError(f"unsupported bound code {code}")

    return MilpProblem(lp, frozenset(cols[c] for c in binaries))

"""Per-node and total utilities for the three game modes.

Homogeneous play scores each node with a clamped sign of the allocation
difference.  Linear-heterogeneous play converts every type into a
reference type and reuses the homogeneous score.  Cyclic-dominance play
(three mutually inhibiting types) scores a node by the outcome value
``pi``: the median of three linear forms obtained by converting the
post-subtraction remainder fully into each type, whose sign provably
matches the deterministic elimination process implemented in
:func:`elimination_oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGN_ZERO_TOL = 1e-10

# deterministic scan order over discordant coordinate pairs
_SCAN_PAIRS = ((0, 1), (0, 2), (1, 2))


class PayoffError(ValueError):
    """Invalid intrinsic data or incompatible strategy shapes."""


@dataclass(frozen=True)
class IntrinsicMatrix:
    """Pairwise conversion ratios between robot types.

    ``entries[i, j]`` is the worth of one type-(i+1) robot measured in
    type-(j+1) robots; NaN marks pairs with no defined conversion (the
    non-dominance pairs of cyclic mode).
    """

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise PayoffError("intrinsic matrix must be square")
        if not np.allclose(np.diagonal(e), 1.0, atol=1e-12, equal_nan=False):
            raise PayoffError("intrinsic diagonal must be 1")

    @property
    def type_count(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def cyclic(cls, i12: float, i23: float, i31: float) -> "IntrinsicMatrix":
        """Three-type rock-paper-scissors dominance: 1 beats 2, 2 beats 3, 3 beats 1."""
        e = np.full((3, 3), np.nan)
        np.fill_diagonal(e, 1.0)
        e[0, 1], e[1, 2], e[2, 0] = i12, i23, i31
        return cls(e)

    @classmethod
    def linear(cls, matrix: np.ndarray) -> "IntrinsicMatrix":
        out = cls(np.asarray(matrix, dtype=float))
        out.validate_linear()
        return out

    def validate_linear(self, tol: float = 1e-9) -> None:
        e = self.entries
        if np.any(np.isnan(e)) or np.any(e <= 0):
            raise PayoffError("linear intrinsic matrix must be fully positive")
        m = self.type_count
        for i in range(m):
            for j in range(m):
                if abs(e[i, j] * e[j, i] - 1.0) > tol:
                    raise PayoffError(f"intrinsic not reversible at ({i}, {j})")
                for k in range(m):
                    if abs(e[i, k] * e[k, j] - e[i, j]) > tol:
                        raise PayoffError(f"intrinsic not multiplicative at ({i}, {k}, {j})")

    def validate_cyclic(self) -> bool:
        """Check the dominance entries exist; returns False when some equal 1
        exactly (accepted but outside the proven regime)."""
        if self.type_count != 3:
            raise PayoffError("cyclic dominance supports exactly 3 types")
        i12, i23, i31 = self.entries[0, 1], self.entries[1, 2], self.entries[2, 0]
        if np.any(np.isnan([i12, i23, i31])) or min(i12, i23, i31) <= 0:
            raise PayoffError("cyclic intrinsic needs positive entries (1,2), (2,3), (3,1)")
        return min(i12, i23, i31) > 1.0

    def cyclic_ratios(self) -> tuple[float, float, float]:
        return (
            float(self.entries[0, 1]),
            float(self.entries[1, 2]),
            float(self.entries[2, 0]),
        )


def sgn_clamped(x: float, c: float) -> float:
    """Sign of ``x`` smoothed linearly through the band [-c, c]."""
    if c <= 0:
        raise PayoffError("clamp threshold must be positive")
    return float(np.clip(x / c, -1.0, 1.0))


def utility_homogeneous(sx: np.ndarray, sy: np.ndarray, c: float) -> float:
    """Node-wise clamped-sign score of Player 1's surplus, summed over nodes."""
    sx = np.asarray(sx, dtype=float).reshape(-1)
    sy = np.asarray(sy, dtype=float).reshape(-1)
    if sx.shape != sy.shape:
        raise PayoffError(f"strategy shapes differ: {sx.shape} vs {sy.shape}")
    if c <= 0:
        raise PayoffError("clamp threshold must be positive")
    return float(np.clip((sx - sy) / c, -1.0, 1.0).sum())


def reduce_linear_heterogeneous(
    d: np.ndarray,
    intrinsic: IntrinsicMatrix,
    reference_type: int,
    totals: np.ndarray,
) -> np.ndarray:
    """Collapse a linear-heterogeneous distribution to one reference type.

    Per node, the fraction rows are scaled to absolute amounts by the
    per-type totals, converted into reference-type units (one type-i
    robot is worth entries[i, f] type-f robots), summed, and the result
    renormalized to a unit-sum fraction row.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    m = d.shape[0]
    if m == 1:
        return d.copy()
    intrinsic.validate_linear()
    if intrinsic.type_count != m:
        raise PayoffError("intrinsic size does not match type count")
    totals = np.asarray(totals, dtype=float).reshape(-1)
    if totals.shape[0] != m or np.any(totals <= 0):
        raise PayoffError("need a positive total amount per type")
    weights = intrinsic.entries[:, reference_type] * totals
    combined = weights @ d
    return (combined / combined.sum()).reshape(1, -1)


def g_coefficients(intrinsic: IntrinsicMatrix) -> np.ndarray:
    """Rows of the full-conversion linear forms (one per target type)."""
    i12, i23, i31 = intrinsic.cyclic_ratios()
    return np.array(
        [
            [1.0, i23 * i31, i31],
            [i12, 1.0, i12 * i31],
            [i12 * i23, i23, 1.0],
        ]
    )


def g_components(delta: np.ndarray, intrinsic: IntrinsicMatrix) -> tuple[float, float, float]:
    vals = g_coefficients(intrinsic) @ np.asarray(delta, dtype=float)
    return tuple(float(v) for v in vals)


def pi_oi(delta: np.ndarray, intrinsic: IntrinsicMatrix) -> float:
    """Max-min lattice polynomial of the three conversion forms, i.e. their median."""
    g1, g2, g3 = g_components(delta, intrinsic)
    return max(min(g1, g2), min(g1, g3), min(g2, g3))


def u_cdh(sx: np.ndarray, sy: np.ndarray, intrinsic: IntrinsicMatrix, c: float) -> float:
    """Cyclic-dominance utility: clamped per-node outcome values, summed."""
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    if sx.shape != sy.shape or sx.shape[0] != 3:
        raise PayoffError("cyclic utility needs matching 3xN strategies")
    if c <= 0:
        raise PayoffError("clamp threshold must be positive")
    pis = np.median(g_coefficients(intrinsic) @ (sx - sy), axis=0)
    return float(np.clip(pis / c, -1.0, 1.0).sum())


def u_cdh_batch(
    sx_batch: np.ndarray, sy: np.ndarray, intrinsic: IntrinsicMatrix, c: float
) -> np.ndarray:
    """Vectorized u_cdh for a (P, 3, N) batch of Player-1 strategies."""
    deltas = sx_batch - sy[None, :, :]
    forms = np.einsum("gt,ptn->pgn", g_coefficients(intrinsic), deltas)
    pis = np.median(forms, axis=1)
    return np.clip(pis / c, -1.0, 1.0).sum(axis=1)


def elimination_oracle(
    delta: np.ndarray, intrinsic: IntrinsicMatrix
) -> tuple[int, np.ndarray]:
    """Deterministic pairwise elimination of a post-subtraction remainder.

    Scans coordinate pairs in the fixed order (1,2), (1,3), (2,3); at the
    first discordant pair the dominant type's mass eliminates opposing
    mass of the dominated type at the intrinsic ratio until one side hits
    zero.  Repeats until all entries are concordant, then reports the
    winner sign (+1 Player 1, -1 Player 2, 0 draw) and the final vector.
    """
    intrinsic.validate_cyclic()
    i12, i23, i31 = intrinsic.cyclic_ratios()
    # dominant coordinate and kill ratio for each scanned pair
    rules = {(0, 1): (0, i12), (0, 2): (2, i31), (1, 2): (1, i23)}
    v = np.asarray(delta, dtype=float).copy()
    if v.shape != (3,):
        raise PayoffError("elimination needs a 3-vector")

    def discordant(a: float, b: float) -> bool:
        return (a > SIGN_ZERO_TOL and b < -SIGN_ZERO_TOL) or (
            a < -SIGN_ZERO_TOL and b > SIGN_ZERO_TOL
        )

    for _ in range(8):  # at most 2 iterations suffice in 3D; margin is free
        pair = next((p for p in _SCAN_PAIRS if discordant(v[p[0]], v[p[1]])), None)
        if pair is None:
            break
        dom, ratio = rules[pair]
        sub = pair[0] if pair[1] == dom else pair[1]
        if abs(v[dom]) * ratio >= abs(v[sub]):
            v[dom] -= np.sign(v[dom]) * abs(v[sub]) / ratio
            v[sub] = 0.0
        else:
            v[sub] -= np.sign(v[sub]) * abs(v[dom]) * ratio
            v[dom] = 0.0

    if np.any(v > SIGN_ZERO_TOL):
        return 1, v
    if np.any(v < -SIGN_ZERO_TOL):
        return -1, v
    return 0, v


@dataclass(frozen=True)
class GameRules:
    """Utility evaluator for one configured game mode."""

    mode: str  # homogeneous | linear | cdh
    threshold: float
    intrinsic: IntrinsicMatrix | None = None

    def __post_init__(self):
        if self.mode not in ("homogeneous", "linear", "cdh"):
            raise PayoffError(f"unknown mode {self.mode!r}")
        if self.threshold <= 0:
            raise PayoffError("threshold must be positive")
        if self.mode == "cdh":
            if self.intrinsic is None:
                raise PayoffError("cyclic mode needs an intrinsic matrix")
            self.intrinsic.validate_cyclic()

    @property
    def type_count(self) -> int:
        return 3 if self.mode == "cdh" else 1

    def utility(self, sx: np.ndarray, sy: np.ndarray) -> float:
        if self.mode == "cdh":
            return u_cdh(sx, sy, self.intrinsic, self.threshold)
        return utility_homogeneous(sx, sy, self.threshold)

    def utility_batch(self, sx_batch: np.ndarray, sy: np.ndarray) -> np.ndarray:
        if self.mode == "cdh":
            return u_cdh_batch(sx_batch, sy, self.intrinsic, self.threshold)
        flat = sx_batch.reshape(sx_batch.shape[0], -1)
        deltas = flat - sy.reshape(-1)[None, :]
        return np.clip(deltas / self.threshold, -1.0, 1.0).sum(axis=1)

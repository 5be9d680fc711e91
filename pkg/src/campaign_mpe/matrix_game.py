"""Exact solution of finite zero-sum matrix games.

The row player minimizes, the column player maximizes.  The accelerated
solve first searches for a pure saddle point, then iteratively eliminates
weakly dominated actions, and only then solves the remaining game as a
linear program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

SADDLE_TOL = 1e-9
DOMINANCE_TOL = 1e-9
LP_TOL = 1e-8


class MatrixGameError(RuntimeError):
    """Numerical failure inside the LP solve (should not happen for finite payoffs)."""


@dataclass(frozen=True)
class PayoffMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"payoff matrix must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("payoff matrix entries must be finite")
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass
class GameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    pure: bool
    eliminated_rows: int = 0
    eliminated_cols: int = 0
    used_lp: bool = False


def _as_matrix(R) -> np.ndarray:
    return R.entries if isinstance(R, PayoffMatrix) else np.asarray(R, dtype=float)


def find_pure_saddle(R, tol: float = SADDLE_TOL):
    """Lowest-index minimax row and maximin column if their values coincide
    within tol, else None.  Exact on integer matrices with tol=0."""
    M = _as_matrix(R)
    row_worst = M.max(axis=1)
    col_best = M.min(axis=0)
    row = int(np.argmin(row_worst))
    col = int(np.argmax(col_best))
    if row_worst[row] - col_best[col] <= tol:
        return row, col, float(M[row, col])
    return None


def eliminate_weakly_dominated(R, row_set=None, col_set=None,
                               tol: float = DOMINANCE_TOL):
    """Fixed point of alternating weak-dominance removal.

    A row r is removed when some surviving row r' has entries <= those of r
    everywhere (the row player minimizes); columns symmetrically with >=.
    Among mutually dominating (duplicate) actions the lowest index survives.
    Never empties a side.
    """
    M = _as_matrix(R)
    rows = list(range(M.shape[0])) if row_set is None else sorted(row_set)
    cols = list(range(M.shape[1])) if col_set is None else sorted(col_set)

    def sweep(indices, dominated_by):
        removed = False
        for j in list(indices):
            if len(indices) == 1:
                break
            for i in indices:
                if i == j:
                    continue
                if dominated_by(i, j) and (i < j or not dominated_by(j, i)):
                    indices.remove(j)
                    removed = True
                    break
        return removed

    sub = lambda: M[np.ix_(rows, cols)]  # noqa: E731
    changed = True
    while changed:
        changed = False
        S = M[:, cols]
        if sweep(rows, lambda i, j: bool(np.all(S[i] <= S[j] + tol))):
            changed = True
        S = M[rows, :]
        if sweep(cols, lambda i, j: bool(np.all(S[:, i] >= S[:, j] - tol))):
            changed = True
    return rows, cols


def solve_lp(R, row_set=None, col_set=None) -> GameSolution:
    """Solve the game restricted to the given index sets by linear
    programming; strategies come back expanded over the full index space.

    minimize z subject to sum_r R[r, c] * pi_r <= z for every column c and
    pi a distribution; the column strategy is read off the dual multipliers
    and the duality gap is certified to LP_TOL by direct best responses.
    """
    M = _as_matrix(R)
    rows = list(range(M.shape[0])) if row_set is None else list(row_set)
    cols = list(range(M.shape[1])) if col_set is None else list(col_set)
    S = M[np.ix_(rows, cols)]
    m, n = S.shape

    if m == 1 or n == 1:
        # degenerate shapes reduce to a plain min/max
        r = int(np.argmin(S.max(axis=1)))
        c = int(np.argmax(S.min(axis=0)))
        value = float(S[r, c])
        pi = np.zeros(m)
        pi[r] = 1.0
        sigma = np.zeros(n)
        sigma[c] = 1.0
    else:
        c_obj = np.zeros(m + 1)
        c_obj[m] = 1.0
        A_ub = np.hstack([S.T, -np.ones((n, 1))])
        b_ub = np.zeros(n)
        A_eq = np.zeros((1, m + 1))
        A_eq[0, :m] = 1.0
        res = linprog(c_obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * m + [(None, None)], method="highs")
        if not res.success:
            raise MatrixGameError(f"LP failed: {res.message}")
        value = float(res.x[m])
        pi = np.clip(res.x[:m], 0.0, None)
        pi /= pi.sum()
        sigma = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
        total = sigma.sum()
        if total < 0.5:
            sigma = _dual_strategy(S)
        else:
            sigma /= total
        worst_col = float((pi @ S).max())
        best_row = float((S @ sigma).min())
        if abs(worst_col - value) > LP_TOL or value - best_row > LP_TOL:
            raise MatrixGameError(
                f"duality gap not certified: value={value}, "
                f"row side={worst_col}, col side={best_row}")

    row_strategy = np.zeros(M.shape[0])
    row_strategy[rows] = pi
    col_strategy = np.zeros(M.shape[1])
    col_strategy[cols] = sigma
    return GameSolution(value=value, row_strategy=row_strategy,
                       col_strategy=col_strategy, pure=False, used_lp=True)


def _dual_strategy(S: np.ndarray) -> np.ndarray:
    """Column player's strategy by solving the dual LP explicitly (fallback
    for degenerate duals)."""
    m, n = S.shape
    c_obj = np.zeros(n + 1)
    c_obj[n] = -1.0  # maximize w
    A_ub = np.hstack([-S, np.ones((m, 1))])
    b_ub = np.zeros(m)
    A_eq = np.zeros((1, n + 1))
    A_eq[0, :n] = 1.0
    res = linprog(c_obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n + [(None, None)], method="highs")
    if not res.success:
        raise MatrixGameError(f"dual LP failed: {res.message}")
    sigma = np.clip(res.x[:n], 0.0, None)
    return sigma / sigma.sum()


def azs(R, tol: float = SADDLE_TOL) -> GameSolution:
    """Accelerated solve: pure saddle if one exists, else iterated weak-
    dominance elimination followed by an LP on the surviving actions."""
    M = _as_matrix(R)
    saddle = find_pure_saddle(M, tol)
    if saddle is not None:
        row, col, value = saddle
        pi = np.zeros(M.shape[0])
        pi[row] = 1.0
        sigma = np.zeros(M.shape[1])
        sigma[col] = 1.0
        return GameSolution(value=value, row_strategy=pi, col_strategy=sigma,
                            pure=True)
    rows, cols = eliminate_weakly_dominated(M)
    sol = solve_lp(M, rows, cols)
    sol.eliminated_rows = M.shape[0] - len(rows)
    sol.eliminated_cols = M.shape[1] - len(cols)
    return sol

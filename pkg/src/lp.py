"""
Dense two-phase simplex with Bland's rule.

Problems are given in the natural form

    min (or max) cᵀx  s.t.  a_i x  (≤ | = | ≥)  b_i,   lb ≤ x ≤ ub

and solved on a dense tableau. The solver is deterministic: identical input
produces the identical pivot sequence.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from src.util.errors import NumericalFailure, UsageError

PIVOT_TOL = 1e-10
FEASIBILITY_TOL = 1e-8
MAX_VARIABLES = 20000

SENSES = ("<=", "=", ">=")


@dataclass
class LPProblem:
    """
    Args:
        c: Objective coefficients.
        a: Constraint matrix (rows × variables).
        senses: One of "<=", "=", ">=" per row.
        b: Right-hand sides.
        lb: Finite lower bounds (default 0).
        ub: Upper bounds, ``np.inf`` for none (default none).
        maximize: Maximize instead of minimize.
    """

    c: np.ndarray
    a: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.a = np.asarray(self.a, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel()
        m = self.a.shape[0]
        if self.b.size != m or len(self.senses) != m:
            raise UsageError(f"LP has {m} rows but {self.b.size} rhs and {len(self.senses)} senses")
        if self.lb.size != n or self.ub.size != n:
            raise UsageError("LP bounds do not match the number of variables")
        if any(s not in SENSES for s in self.senses):
            raise UsageError(f"Unknown row sense in {set(self.senses) - set(SENSES)}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise UsageError("LP data must be finite")
        if not np.all(np.isfinite(self.lb)):
            raise UsageError("LP lower bounds must be finite")
        if n > MAX_VARIABLES:
            raise UsageError(f"LP has {n} variables (limit {MAX_VARIABLES})")


@dataclass
class LPSolution:
    """
    ``duals`` has one entry per constraint row followed by one entry per
    finite upper bound; ``farkas`` uses the same layout and is set only for
    infeasible problems (y with Aᵀy ≤ 0, yᵀb > 0 and y ≤ 0 on ≤-rows, y ≥ 0
    on ≥-rows, all taken after shifting x by its lower bound).
    """

    status: str
    value: float = np.nan
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    dual_value: float = np.nan
    farkas: Optional[np.ndarray] = None
    pivots: int = 0
    residual: float = np.nan

    @property
    def gap(self) -> float:
        return abs(self.value - self.dual_value)


@dataclass
class _StandardForm:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    signs: np.ndarray
    slack_kind: List[int] = field(default_factory=list)
    n_struct: int = 0


def _standardize(prob: LPProblem) -> _StandardForm:
    n = prob.c.size
    shift = prob.a @ prob.lb
    rows = [prob.a]
    rhs = [prob.b - shift]
    senses = list(prob.senses)
    bounded = np.flatnonzero(np.isfinite(prob.ub))
    if bounded.size:
        rows.append(np.eye(n)[bounded])
        rhs.append(prob.ub[bounded] - prob.lb[bounded])
        senses += ["<="] * bounded.size
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    signs = np.where(b < 0, -1.0, 1.0)
    a = a * signs[:, None]
    b = b * signs
    slack_kind = []
    for sense, sign in zip(senses, signs):
        if sense == "=":
            slack_kind.append(0)
        else:
            kind = 1 if sense == "<=" else -1
            slack_kind.append(int(kind * sign))
    m = a.shape[0]
    slack_rows = [i for i in range(m) if slack_kind[i] != 0]
    slack_cols = np.zeros((m, len(slack_rows)))
    for col, i in enumerate(slack_rows):
        slack_cols[i, col] = slack_kind[i]
    c = -prob.c if prob.maximize else prob.c
    c_std = np.concatenate([c, np.zeros(len(slack_rows))])
    return _StandardForm(np.hstack([a, slack_cols]), b, c_std, signs, slack_kind, n)


class _Tableau:
    def __init__(self, a: np.ndarray, b: np.ndarray, basis: List[int]):
        self.t = a.copy()
        self.rhs = b.copy()
        self.basis = list(basis)
        self.pivots = 0

    def reduced_costs(self, c: np.ndarray):
        cb = c[self.basis]
        return c - cb @ self.t, float(cb @ self.rhs)

    def pivot(self, row: int, col: int) -> None:
        piv = self.t[row, col]
        self.t[row] /= piv
        self.rhs[row] /= piv
        factors = self.t[:, col].copy()
        factors[row] = 0.0
        self.t -= np.outer(factors, self.t[row])
        self.rhs -= factors * self.rhs[row]
        self.basis[row] = col
        self.pivots += 1

    def run(self, c: np.ndarray, allowed: np.ndarray, max_pivots: int) -> str:
        """Bland's rule until optimal or unbounded."""
        while True:
            if self.pivots > max_pivots:
                raise NumericalFailure(
                    f"Simplex exceeded {max_pivots} pivots", best=(self.basis, self.rhs.copy())
                )
            reduced, _ = self.reduced_costs(c)
            candidates = np.flatnonzero((reduced < -PIVOT_TOL) & allowed)
            if candidates.size == 0:
                return "optimal"
            col = int(candidates[0])
            column = self.t[:, col]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = self.rhs[rows] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            row = int(min(tied, key=lambda i: self.basis[i]))
            logging.debug(f"pivot {self.pivots}: enter {col}, leave {self.basis[row]}")
            self.pivot(row, col)


def solve_lp(prob: LPProblem) -> LPSolution:
    """
    Solves an LP with the two-phase simplex method.

    Returns:
        LPSolution with status "optimal", "infeasible" or "unbounded".

    Raises:
        NumericalFailure: when the pivot guard is exhausted.
    """
    std = _standardize(prob)
    m, n_std = std.a.shape
    max_pivots = 50 * (m + n_std) + 1000

    # phase 1: one artificial per row that has no +1 slack
    basis = [-1] * m
    slack_col = std.n_struct
    for i, kind in enumerate(std.slack_kind):
        if kind != 0:
            if kind == 1:
                basis[i] = slack_col
            slack_col += 1
    art_rows = [i for i in range(m) if basis[i] < 0]
    art = np.zeros((m, len(art_rows)))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
        basis[i] = n_std + k
    a1 = np.hstack([std.a, art])
    c1 = np.concatenate([np.zeros(n_std), np.ones(len(art_rows))])
    tab = _Tableau(a1, std.b, basis)
    tab.run(c1, np.ones(a1.shape[1], dtype=bool), max_pivots)
    _, infeasibility = tab.reduced_costs(c1)
    if infeasibility > FEASIBILITY_TOL * max(1.0, float(np.abs(std.b).max(initial=0.0))):
        basis_mat = a1[:, tab.basis]
        y_std = np.linalg.lstsq(basis_mat.T, c1[tab.basis], rcond=None)[0]
        logging.info(f"LP infeasible (phase-1 value {infeasibility:.3e})")
        return LPSolution(status="infeasible", farkas=y_std * std.signs, pivots=tab.pivots)

    # drive remaining artificials out of the basis; rows where that fails are redundant
    keep_rows = []
    for i in range(m):
        if tab.basis[i] >= n_std:
            nonzero = np.flatnonzero(np.abs(tab.t[i, :n_std]) > PIVOT_TOL)
            if nonzero.size:
                tab.pivot(i, int(nonzero[0]))
                keep_rows.append(i)
        else:
            keep_rows.append(i)
    tab.t = tab.t[keep_rows, :n_std]
    tab.rhs = tab.rhs[keep_rows]
    tab.basis = [tab.basis[i] for i in keep_rows]

    status = tab.run(std.c, np.ones(n_std, dtype=bool), max_pivots)
    if status == "unbounded":
        logging.info("LP unbounded")
        return LPSolution(status="unbounded", pivots=tab.pivots)

    x_std = np.zeros(n_std)
    x_std[tab.basis] = np.clip(tab.rhs, 0.0, None)
    x = x_std[: std.n_struct] + prob.lb
    value = float(prob.c @ x)

    y_std = np.zeros(m)
    basis_mat = std.a[np.ix_(keep_rows, tab.basis)]
    try:
        y_std[keep_rows] = np.linalg.solve(basis_mat.T, std.c[tab.basis])
    except np.linalg.LinAlgError:
        y_std[keep_rows] = np.linalg.lstsq(basis_mat.T, std.c[tab.basis], rcond=None)[0]
    duals = y_std * std.signs
    if prob.maximize:
        duals = -duals
    b_all = np.concatenate([prob.b, prob.ub[np.isfinite(prob.ub)]])
    a_all = np.vstack([prob.a, np.eye(prob.c.size)[np.isfinite(prob.ub)]])
    dual_value = float(duals @ (b_all - a_all @ prob.lb) + prob.c @ prob.lb)
    residual = _primal_residual(prob, x)
    logging.debug(f"LP optimal: value={value:.10g}, pivots={tab.pivots}, residual={residual:.2e}")
    return LPSolution(
        status="optimal",
        value=value,
        x=x,
        duals=duals,
        dual_value=dual_value,
        pivots=tab.pivots,
        residual=residual,
    )


def _primal_residual(prob: LPProblem, x: np.ndarray) -> float:
    ax = prob.a @ x
    viol = [0.0]
    for i, sense in enumerate(prob.senses):
        if sense == "<=":
            viol.append(ax[i] - prob.b[i])
        elif sense == ">=":
            viol.append(prob.b[i] - ax[i])
        else:
            viol.append(abs(ax[i] - prob.b[i]))
    viol.append(float(np.max(prob.lb - x, initial=0.0)))
    viol.append(float(np.max(np.where(np.isfinite(prob.ub), x - prob.ub, 0.0), initial=0.0)))
    return max(0.0, float(np.max(viol)))

"""
Partially smoothed classical measures under trace-distance smoothing.

Every measure is an exact LP over the smoothed table P′ (indexed x·|Y| + y)
plus slack variables u, v with P′ − P = u − v. Optimizers are re-checked
against the defining program with numpy after every solve.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.lp import LPProblem, solve_lp
from src.probability import (
    apply_function,
    as_distribution,
    generalized_trace_distance,
    marginal,
    product,
)
from src.reports import CheckReport
from src.spectrum import d_max_classical, h_s, i_s, i_s_given_q
from src.util.errors import DomainError, NumericalFailure, UsageError
from src.util.utils import log2_or_inf

VERIFY_TOL = 1e-7
BALL_TOL = 1e-8


@dataclass
class SmoothedMeasureResult:
    """
    Args:
        value: Measure in bits (+∞ if the program is infeasible).
        optimizer: Smoothed table P̃_XY.
        q: Optimizing Q_Y (max-information only).
        distance: Achieved T(P̃, P).
        residual: Largest constraint violation found by the re-check.
        lp_value: Raw LP optimum (ΣR, t, or t for min-entropy).
    """

    value: float
    optimizer: Optional[np.ndarray]
    q: Optional[np.ndarray]
    distance: float
    residual: float
    lp_value: float

    def to_dict(self) -> dict:
        return {
            "value": self.value if np.isfinite(self.value) else str(self.value),
            "optimizer": None if self.optimizer is None else self.optimizer.tolist(),
            "q": None if self.q is None else self.q.tolist(),
            "distance": self.distance,
            "residual": self.residual,
            "lp_value": self.lp_value,
        }


@dataclass
class SmootherCertificate:
    """Explicit smoothed table with the numbers that certify it."""

    smoothed: np.ndarray
    c: float
    tail_mass: float
    distance: float
    dmax: float

    @property
    def dmax_bound(self) -> float:
        return float(np.log2(2.0 ** self.c + 1.0)) if np.isfinite(self.c) else np.inf


def as_joint(p) -> np.ndarray:
    p = as_distribution(p)
    if p.ndim != 2:
        raise UsageError(f"Expected a bipartite table P_XY, got {p.ndim} factors")
    return p


def check_eps(eps: float) -> None:
    """(ε, T) is valid for normalized P iff 0 ≤ ε < T(P, 0) = 1."""
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"Smoothing radius ε={eps} is not valid: need 0 ≤ ε < T(P, 0) = 1")


class _Layout:
    """Column offsets of P′, the per-measure block, u and v."""

    def __init__(self, nx: int, ny: int, extra: int):
        self.nx, self.ny, self.n = nx, ny, nx * ny
        self.p0 = 0
        self.e0 = self.n
        self.u0 = self.n + extra
        self.v0 = self.u0 + self.n
        self.size = self.v0 + self.n

    def ball_rows(self, p: np.ndarray):
        """P′ − u + v = P."""
        rows = np.zeros((self.n, self.size))
        eye = np.eye(self.n)
        rows[:, self.p0 : self.p0 + self.n] = eye
        rows[:, self.u0 : self.u0 + self.n] = -eye
        rows[:, self.v0 : self.v0 + self.n] = eye
        return rows, p.ravel()

    def slack_row(self) -> np.ndarray:
        """½Σ(u + v)."""
        row = np.zeros(self.size)
        row[self.u0 :] = 0.5
        return row


def _imax_lp(p: np.ndarray, eps: float, q_y: Optional[np.ndarray], fix_marginal: bool):
    nx, ny = p.shape
    px = marginal(p, [0])
    extra = ny if q_y is None else 1
    lay = _Layout(nx, ny, extra)
    xs, ys = np.divmod(np.arange(lay.n), ny)

    dom = np.zeros((lay.n, lay.size))
    dom[np.arange(lay.n), np.arange(lay.n)] = 1.0
    if q_y is None:
        dom[np.arange(lay.n), lay.e0 + ys] = -px[xs]
    else:
        dom[:, lay.e0] = -px[xs] * q_y[ys]

    if fix_marginal:
        marg = np.zeros((nx, lay.size))
        marg[xs, np.arange(lay.n)] = 1.0
        marg_b = px
    else:
        marg = np.zeros((1, lay.size))
        marg[0, : lay.n] = 1.0
        marg_b = np.array([1.0])

    ball, ball_b = lay.ball_rows(p)
    a = np.vstack([dom, marg, ball, lay.slack_row()[None, :]])
    b = np.concatenate([np.zeros(lay.n), marg_b, ball_b, [eps]])
    senses = ["<="] * lay.n + ["="] * len(marg_b) + ["="] * lay.n + ["<="]
    c = np.zeros(lay.size)
    c[lay.e0 : lay.e0 + extra] = 1.0
    return LPProblem(c=c, a=a, senses=senses, b=b), lay


def _verify_imax(p, p_s, r_full, fix_marginal) -> float:
    """Largest violation of the max-information program at (P′, R)."""
    px = marginal(p, [0])
    viol = [float(np.max(p_s - np.outer(px, r_full), initial=0.0)), float(np.max(-p_s, initial=0.0))]
    if fix_marginal:
        viol.append(float(np.max(np.abs(p_s.sum(axis=1) - px))))
    else:
        viol.append(abs(float(p_s.sum()) - 1.0))
    return max(viol)


def _solve_imax(p, eps, q_y, fix_marginal, label) -> SmoothedMeasureResult:
    p = as_joint(p)
    check_eps(eps)
    if q_y is not None:
        q_y = as_distribution(q_y)
        if q_y.shape != (p.shape[1],):
            raise UsageError(f"Q_Y has shape {q_y.shape}, expected ({p.shape[1]},)")
    prob, lay = _imax_lp(p, eps, q_y, fix_marginal)
    sol = solve_lp(prob)
    if sol.status == "infeasible":
        logging.info(f"{label}: program infeasible, value +inf")
        return SmoothedMeasureResult(np.inf, None, q_y, np.nan, 0.0, np.inf)
    if sol.status != "optimal":
        raise NumericalFailure(f"{label}: LP ended with status {sol.status}", best=sol)
    p_s = np.clip(sol.x[: lay.n], 0.0, None).reshape(p.shape)
    block = sol.x[lay.e0 : lay.u0]
    r_full = block if q_y is None else block[0] * q_y
    total = float(r_full.sum())
    residual = _verify_imax(p, p_s, r_full, fix_marginal)
    distance = generalized_trace_distance(p_s, p)
    if residual > VERIFY_TOL or distance > eps + BALL_TOL:
        logging.error(f"{label}: optimizer re-check failed (residual {residual:.2e}, T={distance:.6f})")
        raise NumericalFailure(f"{label}: optimizer violates its program", best=sol)
    q_opt = r_full / total if total > 0 else q_y
    value = log2_or_inf(total)
    logging.info(f"{label}(ε={eps}) = {value:.6f}")
    return SmoothedMeasureResult(value, p_s, q_opt, distance, residual, total)


def imax_partial_classical(p, eps: float) -> SmoothedMeasureResult:
    """
    I_max^{ε,T}(Ẋ;Y): smooth max-information with the X-marginal fixed.

    The inner infimum over Q_Y and λ is linearized by R = 2^λ·Q_Y, so the
    LP minimizes ΣR subject to P′ ≤ P_X × R.
    """
    return _solve_imax(p, eps, None, True, "imax_partial")


def imax_partial_given_q(p, q_y, eps: float) -> SmoothedMeasureResult:
    """I_max^{ε,T}(Ẋ;Y)_{P|Q}: same program with R = t·Q_Y."""
    return _solve_imax(p, eps, q_y, True, "imax_partial_given_q")


def imax_full_classical(p, eps: float) -> SmoothedMeasureResult:
    """Smooth max-information without the marginal constraint (ΣP′ = 1 kept)."""
    return _solve_imax(p, eps, None, False, "imax_full")


def _hmin_lp(p: np.ndarray, eps: float, fix_marginal: bool):
    nx, ny = p.shape
    py = marginal(p, [1])
    lay = _Layout(nx, ny, 1)
    xs, ys = np.divmod(np.arange(lay.n), ny)

    dom = np.zeros((lay.n, lay.size))
    dom[np.arange(lay.n), np.arange(lay.n)] = 1.0
    dom[:, lay.e0] = -py[ys]

    rows = [dom]
    rhs = [np.zeros(lay.n)]
    senses = ["<="] * lay.n
    if fix_marginal:
        marg = np.zeros((ny, lay.size))
        marg[ys, np.arange(lay.n)] = 1.0
        rows.append(marg)
        rhs.append(py)
        senses += ["<="] * ny
    total = np.zeros((1, lay.size))
    total[0, : lay.n] = 1.0
    rows.append(total)
    rhs.append([1.0])
    senses.append("<=")

    ball, ball_b = lay.ball_rows(p)
    rows.append(ball)
    rhs.append(ball_b)
    senses += ["="] * lay.n
    # ½Σ|P′ − P| + ½(1 − ΣP′) ≤ ε
    t_row = lay.slack_row()
    t_row[: lay.n] -= 0.5
    rows.append(t_row[None, :])
    rhs.append([eps - 0.5])
    senses.append("<=")

    c = np.zeros(lay.size)
    c[lay.e0] = 1.0
    return LPProblem(c=c, a=np.vstack(rows), senses=senses, b=np.concatenate(rhs)), lay


def _solve_hmin(p, eps, fix_marginal, label) -> SmoothedMeasureResult:
    p = as_joint(p)
    check_eps(eps)
    prob, lay = _hmin_lp(p, eps, fix_marginal)
    sol = solve_lp(prob)
    if sol.status != "optimal":
        raise NumericalFailure(f"{label}: LP ended with status {sol.status}", best=sol)
    p_s = np.clip(sol.x[: lay.n], 0.0, None).reshape(p.shape)
    t = float(sol.x[lay.e0])
    py = marginal(p, [1])
    viol = [
        float(np.max(p_s - t * py[None, :], initial=0.0)),
        float(p_s.sum()) - 1.0,
    ]
    if fix_marginal:
        viol.append(float(np.max(p_s.sum(axis=0) - py, initial=0.0)))
    residual = max(0.0, max(viol))
    distance = generalized_trace_distance(p_s, p)
    if residual > VERIFY_TOL or distance > eps + BALL_TOL:
        logging.error(f"{label}: optimizer re-check failed (residual {residual:.2e}, T={distance:.6f})")
        raise NumericalFailure(f"{label}: optimizer violates its program", best=sol)
    value = -log2_or_inf(t)
    logging.info(f"{label}(ε={eps}) = {value:.6f}")
    return SmoothedMeasureResult(value, p_s, None, distance, residual, t)


def hmin_partial_classical(p, eps: float) -> SmoothedMeasureResult:
    """
    H_min^{ε,T}(X|Ẏ): smooth min-entropy with P̃_Y ≤ P_Y.

    The smoothed table may be sub-normalized; the trace-balance term of T
    is linear because ΣP′ ≤ 1.
    """
    return _solve_hmin(p, eps, True, "hmin_partial")


def hmin_full_classical(p, eps: float) -> SmoothedMeasureResult:
    """Smooth min-entropy without the P̃_Y ≤ P_Y constraint."""
    return _solve_hmin(p, eps, False, "hmin_full")


def thm1_smoother_construction(p, q_y, eps: float) -> SmootherCertificate:
    """
    Builds P′_{Y|x} = P_{Y|x}·1(Good_x) + ε_x·Q_Y with c = I_s^ε(X;Y)_{P|Q}.

    Good_x holds the y whose ratio P_{Y|x}(y)/Q_Y(y) is at most 2^c; ε_x is
    the P_{Y|x}-mass outside Good_x. The result keeps P_X, lies within
    T ≤ Σ_x P_X(x)ε_x of P and has D_max(P′‖P_X × Q) ≤ log2(2^c + 1).
    """
    p = as_joint(p)
    q_y = as_distribution(q_y)
    px = marginal(p, [0])
    ref = product(px, q_y)
    c = i_s_given_q(p, q_y, eps)
    with np.errstate(divide="ignore"):
        log_ratio = np.where(
            p > 0, np.log2(np.where(p > 0, p, 1.0)) - np.log2(np.where(ref > 0, ref, 0.0)), -np.inf
        )
    good = (p > 0) & (log_ratio <= c + 1e-12 * max(1.0, abs(c) if np.isfinite(c) else 1.0))
    good_mass = np.where(good, p, 0.0)
    eps_x = np.where(px > 0, (px - good_mass.sum(axis=1)) / np.where(px > 0, px, 1.0), 0.0)
    smoothed = good_mass + np.outer(px * eps_x, q_y)
    tail = float(np.dot(px, eps_x))
    return SmootherCertificate(
        smoothed=smoothed,
        c=c,
        tail_mass=tail,
        distance=generalized_trace_distance(smoothed, p),
        dmax=d_max_classical(smoothed, ref),
    )


def _log_inv(delta: float) -> float:
    return float(np.log2(1.0 / delta))


def check_thm1_sandwich(p, eps: float, delta: float) -> CheckReport:
    """
    Evaluates the four spectrum sandwich inequalities:

        I_s^{ε/(1−δ)+δ} − 2log(1/δ) ≤ I_max^{ε,T}(Ẋ;Y) ≤ I_s^ε + 1
        H_s^{ε/(1−δ)} + log(1/δ) ≥ H_min^{ε,T}(X|Ẏ) ≥ H_s^ε − 1
    """
    p = as_joint(p)
    if not (eps > 0 and delta > 0 and eps + delta <= 1.0):
        raise DomainError(f"Sandwich needs ε, δ > 0 with ε + δ ≤ 1 (got ε={eps}, δ={delta})")
    check_eps(eps)
    imax = imax_partial_classical(p, eps).value
    hmin = hmin_partial_classical(p, eps).value
    q = {
        "imax_partial": imax,
        "hmin_partial": hmin,
        "is_lower": i_s(p, eps / (1 - delta) + delta) - 2 * _log_inv(delta),
        "is_upper": i_s(p, eps) + 1,
        "hs_upper": h_s(p, eps / (1 - delta)) + _log_inv(delta),
        "hs_lower": h_s(p, eps) - 1,
    }
    slacks = {
        "imax >= is_lower": imax - q["is_lower"],
        "imax <= is_upper": q["is_upper"] - imax,
        "hmin <= hs_upper": q["hs_upper"] - hmin,
        "hmin >= hs_lower": hmin - q["hs_lower"],
    }
    return CheckReport("thm1_sandwich", q, _finite_or_inf(slacks), tol=1e-7)


def check_given_q_sandwich(p, q_y, eps: float, delta: float) -> CheckReport:
    """I_s^{ε/(1−δ)}_{P|Q} − log(1/δ) ≤ I_max^{ε,T}(Ẋ;Y)_{P|Q} ≤ I_s^ε_{P|Q} + 1."""
    value = imax_partial_given_q(p, q_y, eps).value
    lower = i_s_given_q(p, q_y, eps / (1 - delta)) - _log_inv(delta)
    upper = i_s_given_q(p, q_y, eps) + 1
    return CheckReport(
        "given_q_sandwich",
        {"imax_given_q": value, "lower": lower, "upper": upper},
        _finite_or_inf({"lower": value - lower, "upper": upper - value}),
        tol=1e-7,
    )


def check_reference_choice_gap(p, q_y, eps: float, delta: float) -> CheckReport:
    """I_s^ε(X;Y)_{P|Q} ≥ I_s^{ε+δ}(X;Y)_P − log(1/δ)."""
    if not (0 < eps + delta < 1 and delta > 0):
        raise DomainError(f"Need 0 < ε + δ < 1 and δ > 0 (got ε={eps}, δ={delta})")
    given_q = i_s_given_q(p, q_y, eps)
    bound = i_s(p, eps + delta) - _log_inv(delta)
    return CheckReport(
        "reference_choice_gap",
        {"is_given_q": given_q, "bound": bound},
        _finite_or_inf({"is_given_q >= bound": given_q - bound}),
        tol=1e-9,
    )


def check_reduction_identities(p, eps: float) -> CheckReport:
    """
    I_s^ε(X;Y)_P = I_s^ε(X;Y)_{P|P_Y},
    H_s^ε(X|Y) = log|X| − I_s^ε(Y;X)_{P|U} and
    H_min^{ε,T}(X|Ẏ) ≥ log|X| − I_max^{ε,T}(Ẏ;X)_{P|U}.
    """
    p = as_joint(p)
    nx = p.shape[0]
    uniform = np.full(nx, 1.0 / nx)
    swapped = p.T
    is_p = i_s(p, eps)
    is_pp = i_s_given_q(p, marginal(p, [1]), eps)
    hs = h_s(p, eps)
    is_u = i_s_given_q(swapped, uniform, eps)
    hmin = hmin_partial_classical(p, eps).value
    imax_u = imax_partial_given_q(swapped, uniform, eps).value
    log_x = float(np.log2(nx))
    return CheckReport(
        "reduction_identities",
        {"is": is_p, "is_given_py": is_pp, "hs": hs, "is_swapped_uniform": is_u, "hmin": hmin, "imax_swapped_uniform": imax_u},
        _finite_or_inf(
            {
                "is identity": -abs(is_p - is_pp),
                "hs identity": -abs(hs - (log_x - is_u)),
                "hmin >= log|X| - imax_u": hmin - (log_x - imax_u),
            }
        ),
        tol=1e-7,
    )


def _finite_or_inf(slacks: dict) -> dict:
    """nan from ∞ − ∞ only arises for vacuous comparisons; report them as +∞."""
    return {k: (np.inf if np.isnan(v) else float(v)) for k, v in slacks.items()}


def smooth_function_extension(p, f: Sequence[int], p_zy_smooth) -> np.ndarray:
    """
    Extends a smoothed P̃_ZY (Z = f(X)) to P̃_XZY = P_{X|ZY}·P̃_ZY.

    Cells with P_ZY(z, y) = 0 spread P̃_ZY(z, y) uniformly over f⁻¹(z).

    Returns:
        np.ndarray: table indexed (x, z, y).
    """
    p = as_joint(p)
    f = np.asarray(f, dtype=int)
    if f.shape != (p.shape[0],):
        raise UsageError(f"f must map each of the {p.shape[0]} symbols of X")
    p_zy_smooth = np.asarray(p_zy_smooth, dtype=float)
    nz = p_zy_smooth.shape[0]
    if f.min() < 0 or f.max() >= nz:
        raise UsageError("f maps outside the Z alphabet of the smoothed table")
    indicator = np.zeros((p.shape[0], nz))
    indicator[np.arange(p.shape[0]), f] = 1.0
    p_xzy = indicator[:, :, None] * p[:, None, :]
    p_zy = p_xzy.sum(axis=0)
    preimage = indicator.sum(axis=0)
    if np.any((preimage == 0) & (p_zy_smooth.sum(axis=1) > 0)):
        raise UsageError("Smoothed table puts mass on a z outside the image of f")
    fallback = indicator / np.where(preimage > 0, preimage, 1.0)
    cond = np.where(
        p_zy[None, :, :] > 0,
        p_xzy / np.where(p_zy > 0, p_zy, 1.0)[None, :, :],
        fallback[:, :, None],
    )
    return cond * p_zy_smooth[None, :, :]


def apply_function_x(p, f: Sequence[int], size: int = None) -> np.ndarray:
    """P_ZY for Z = f(X)."""
    return apply_function(p, f, axis=0, size=size)


def grid_search_imax(p, eps: float, step: float = 1e-2) -> float:
    """
    Brute-force I_max^{ε,T}(Ẋ;Y) for 2×2 tables over a mesh of P′.

    With the X-marginal fixed, P′ has two free coordinates a = P′(0,0),
    b = P′(1,0); the best R for given P′ is R(y) = max_x P′(x,y)/P_X(x).
    """
    p = as_joint(p)
    if p.shape != (2, 2):
        raise UsageError("grid_search_imax handles 2×2 tables only")
    px = marginal(p, [0])
    a = np.arange(0.0, px[0] + 1e-15, step * px[0])
    b = np.arange(0.0, px[1] + 1e-15, step * px[1])
    aa, bb = np.meshgrid(a, b, indexing="ij")
    table = np.stack([np.stack([aa, px[0] - aa], -1), np.stack([bb, px[1] - bb], -1)], axis=-2)
    dist = 0.5 * np.abs(table - p).sum(axis=(-1, -2))
    ratio = table / px[:, None]
    total = ratio.max(axis=-2).sum(axis=-1)
    feasible = dist <= eps + 1e-12
    return float(np.log2(total[feasible].min()))


def grid_search_hmin(p, eps: float, step: float = 1e-2) -> float:
    """
    Brute-force H_min^{ε,T}(X|Ẏ) for 2×2 tables over a mesh of sub-normalized P′
    with P′_Y ≤ P_Y.
    """
    p = as_joint(p)
    if p.shape != (2, 2):
        raise UsageError("grid_search_hmin handles 2×2 tables only")
    py = marginal(p, [1])
    axes = [np.arange(0.0, py[y] + 1e-15, step * py[y]) for y in (0, 1)]
    g01, g10, g11 = np.meshgrid(axes[1], axes[0], axes[1], indexing="ij")
    best = np.inf
    for g00 in axes[0]:
        col0 = g00 + g10
        col1 = g01 + g11
        mass = col0 + col1
        diff = np.abs(g00 - p[0, 0]) + np.abs(g01 - p[0, 1]) + np.abs(g10 - p[1, 0]) + np.abs(g11 - p[1, 1])
        dist = 0.5 * diff + 0.5 * np.abs(1.0 - mass)
        t = np.maximum.reduce([np.full(g01.shape, g00 / py[0]), g01 / py[1], g10 / py[0], g11 / py[1]])
        feasible = (col0 <= py[0] + 1e-12) & (col1 <= py[1] + 1e-12) & (dist <= eps + 1e-12)
        if np.any(feasible):
            best = min(best, float(t[feasible].min()))
    return float(-np.log2(best))


def function_monotonicity_gap(p, f: Sequence[int], eps: float, size: int = None) -> float:
    """H_min^{ε,T}(X|Ẏ) − H_min^{ε,T}(Z|Ẏ) for Z = f(X); nonnegative."""
    pz = apply_function_x(p, f, size=size)
    return hmin_partial_classical(p, eps).value - hmin_partial_classical(pz, eps).value

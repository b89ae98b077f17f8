"""
Quantum max-information and conditional min-entropy, unsmoothed and
smoothed over a purified-distance or generalized-trace-distance ball,
with or without the pinned marginal.

Every smoothed measure is one SDP built with ``src.sdp.SDPProblem``:

- max-information:  min tr S  s.t.  ρ̃ ⪯ ρ_A ⊗ S,  [Tr_B ρ̃ = ρ_A],  tr ρ̃ = 1,  ρ̃ ∈ ball
- min-entropy:      min t     s.t.  ρ̃ ⪯ t·1_A ⊗ ρ_B,  [Tr_A ρ̃ ⪯ ρ_B],  tr ρ̃ ≤ 1,  ρ̃ ∈ ball

The purified ball uses the fidelity LMI [[ρ̃, X], [X†, ρ]] ⪰ 0 with
Re tr X ≥ √(1 − ε²); the generalized-trace ball writes ρ̃ − ρ = P − N.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.linalg import eig_hermitian, hermitize
from src.quantum_smooth.states import (
    as_state,
    conditional_entropy,
    distance,
    dmax_quantum,
    embed,
    marginal_support,
    min_eig,
    mutual_information,
    partial_trace,
    permute_systems,
    restrict,
    tensor_power,
    trace,
)
from src.sdp import LinearMap, SDPProblem, SDPSolution, solve_sdp
from src.util.config import MAX_DIM
from src.util.errors import DomainError, NumericalFailure, ResourceError, UsageError
from src.util.utils import log2_or_inf

METRICS = ("purified", "generalized_trace")
BALL_TOL = 1e-6
OPERATOR_TOL = 1e-7


@dataclass(frozen=True)
class SmoothingBall:
    """Metric ("purified" or "generalized_trace") and radius ε."""

    metric: str
    eps: float

    def __post_init__(self):
        metric = {"P": "purified", "T": "generalized_trace"}.get(self.metric, self.metric)
        object.__setattr__(self, "metric", metric)
        if metric not in METRICS:
            raise UsageError(f"Unknown smoothing metric '{self.metric}'")
        if not 0.0 <= self.eps < 1.0:
            raise DomainError(
                f"(ε={self.eps}, {metric}) is not valid: a normalized state has distance 1 from 0"
            )


@dataclass
class QuantumMeasureResult:
    """
    Args:
        value: Measure in bits.
        state: Optimizing ρ̃_AB.
        sigma: Optimizing σ_B (max-information) or None.
        distance: Achieved distance of ``state`` from ρ.
        operator_residual: Min eigenvalue of the operator inequality slack.
        sdp_residuals: (primal infeasibility, dual infeasibility, relative gap).
    """

    value: float
    state: np.ndarray
    sigma: Optional[np.ndarray]
    distance: float
    operator_residual: float
    sdp_residuals: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def to_dict(self) -> Dict:
        def pack(m):
            return None if m is None else {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}

        return {
            "value": self.value if np.isfinite(self.value) else str(self.value),
            "state": pack(self.state),
            "sigma": pack(self.sigma),
            "distance": self.distance,
            "operator_residual": self.operator_residual,
            "sdp_residuals": list(self.sdp_residuals),
        }


def _check_bipartite(rho, dims) -> Tuple[np.ndarray, Tuple[int, int]]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise UsageError(f"Expected bipartite dims (dA, dB), got {dims}")
    return as_state(rho, dims, normalized=True), dims


def _left_tensor_map(op_a: np.ndarray, d_b: int) -> LinearMap:
    """S ↦ op_A ⊗ S, from the eigendecomposition of op_A."""
    w, v = eig_hermitian(op_a)
    terms = [(lam, np.kron(v[:, [i]], np.eye(d_b))) for i, lam in enumerate(w) if abs(lam) > 0]
    return LinearMap.from_terms(terms)


def _partial_trace_map(dims: Tuple[int, int], keep: int) -> LinearMap:
    """X_AB ↦ Tr_B X (keep=0) or Tr_A X (keep=1)."""
    d_a, d_b = dims
    if keep == 0:
        terms = [(1.0, np.kron(np.eye(d_a), np.eye(d_b)[[j], :])) for j in range(d_b)]
    else:
        terms = [(1.0, np.kron(np.eye(d_a)[[i], :], np.eye(d_b))) for i in range(d_a)]
    return LinearMap.from_terms(terms)


def _compose(outer: LinearMap, inner_kraus: np.ndarray) -> LinearMap:
    """outer ∘ (X ↦ K X K†)."""
    return LinearMap(outer.coefs, np.einsum("cpi,ij->cpj", outer.kraus, inner_kraus))


class _SmoothedState:
    """
    The smoothed variable ρ̃ inside an SDP together with its ball constraint.

    For the purified ball ρ̃ is the top-left corner of a 2D×2D block W whose
    bottom-right corner is pinned to ρ; otherwise ρ̃ is its own block tied to
    ρ by ρ̃ − P + N = ρ.
    """

    def __init__(self, prob: SDPProblem, rho: np.ndarray, ball: SmoothingBall):
        self.dim = rho.shape[0]
        d = self.dim
        self.metric = ball.metric
        if ball.metric == "purified":
            self.name = prob.add_block("W", 2 * d)
            self.select = np.hstack([np.eye(d), np.zeros((d, d))])
            bottom = np.hstack([np.zeros((d, d)), np.eye(d)])
            prob.add_matrix_equality({"W": LinearMap(np.array([1.0]), bottom[None])}, rho, label="W22 = rho")
            coupling = np.zeros((2 * d, 2 * d))
            coupling[:d, d:] = np.eye(d) / 2
            coupling[d:, :d] = np.eye(d) / 2
            prob.add_trace_constraint(
                {"W": coupling}, {}, ">=", float(np.sqrt(1.0 - ball.eps**2)), label="fidelity"
            )
        else:
            self.name = prob.add_block("Rt", d)
            self.select = np.eye(d)
            prob.add_block("Pp", d)
            prob.add_block("Nn", d)
            prob.add_matrix_equality(
                {
                    "Rt": LinearMap.identity(d),
                    "Pp": LinearMap.identity(d, -1.0),
                    "Nn": LinearMap.identity(d, 1.0),
                },
                rho,
                label="Rt - P + N = rho",
            )

    def as_map(self, outer: LinearMap = None) -> LinearMap:
        """Linear map taking the block variable to (outer of) ρ̃."""
        base = LinearMap(np.array([1.0]), self.select[None].astype(complex))
        if outer is None:
            return base
        return _compose(outer, self.select.astype(complex))

    def trace_coefficient(self) -> np.ndarray:
        return self.select.T @ self.select

    def add_trace_ball(self, prob: SDPProblem, eps: float, subnormalized: bool) -> None:
        """½tr(P + N) [+ ½(1 − tr ρ̃)] ≤ ε; only used for the trace ball."""
        d = self.dim
        blocks = {"Pp": np.eye(d) / 2, "Nn": np.eye(d) / 2}
        rhs = eps
        if subnormalized:
            blocks["Rt"] = -np.eye(d) / 2
            rhs = eps - 0.5
        prob.add_trace_constraint(blocks, {}, "<=", rhs, label="trace ball")

    def extract(self, sol: SDPSolution) -> np.ndarray:
        w = sol.blocks[self.name]
        return hermitize(self.select @ w @ self.select.T)


def _solve(prob: SDPProblem, label: str) -> SDPSolution:
    sol = solve_sdp(prob)
    if sol.status != "optimal":
        logging.error(f"{label}: SDP status {sol.status}")
        raise DomainError(f"{label}: smoothing program infeasible (ball not valid for this state)")
    return sol


def _recheck(label: str, dist: float, eps: float, op_residual: float) -> None:
    if dist > eps + BALL_TOL or op_residual < -OPERATOR_TOL:
        logging.error(f"{label}: optimizer re-check failed (distance {dist:.8f}, min eig {op_residual:.2e})")
        raise NumericalFailure(f"{label}: optimizer violates its program")


def imax_unsmoothed(rho, dims: Sequence[int], max_dim: int = MAX_DIM) -> QuantumMeasureResult:
    """I_max(A;B) = log2 min{tr S : ρ_AB ⪯ ρ_A ⊗ S, S ⪰ 0}."""
    rho, dims = _check_bipartite(rho, dims)
    iso = marginal_support(rho, dims, 0)
    rho_r, dims_r = restrict(rho, dims, 0, iso)
    rho_a = partial_trace(rho_r, dims_r, [0])
    d = rho_r.shape[0]
    prob = SDPProblem(max_dim=max_dim)
    prob.add_block("S", dims_r[1])
    prob.add_block("Z", d)
    prob.add_matrix_equality(
        {"Z": LinearMap.identity(d), "S": _left_tensor_map(rho_a, dims_r[1]).scaled(-1.0)},
        -rho_r,
        label="Z = rho_A x S - rho",
    )
    prob.minimize({"S": np.eye(dims_r[1])})
    sol = _solve(prob, "imax_unsmoothed")
    s = sol.blocks["S"]
    total = trace(s)
    slack = min_eig(np.kron(partial_trace(rho, dims, [0]), s) - rho)
    _recheck("imax_unsmoothed", 0.0, 0.0, slack)
    value = log2_or_inf(total)
    logging.info(f"imax_unsmoothed = {value:.6f}")
    return QuantumMeasureResult(value, rho, s / total, 0.0, slack, sol.residuals)


def hmin_unsmoothed(rho, dims: Sequence[int]) -> QuantumMeasureResult:
    """H_min(A|B) = −D_max(ρ_AB‖1_A ⊗ ρ_B)."""
    rho, dims = _check_bipartite(rho, dims)
    reference = np.kron(np.eye(dims[0]), partial_trace(rho, dims, [1]))
    value = -dmax_quantum(rho, reference)
    return QuantumMeasureResult(value, rho, None, 0.0, 0.0)


def _imax_smoothed(rho, dims, ball: SmoothingBall, fix_marginal: bool, max_dim: int, label: str):
    rho, dims = _check_bipartite(rho, dims)
    if ball.eps == 0:
        return imax_unsmoothed(rho, dims, max_dim=max_dim)
    iso = marginal_support(rho, dims, 0)
    rho_r, dims_r = restrict(rho, dims, 0, iso)
    rho_a = partial_trace(rho_r, dims_r, [0])
    d_b = dims_r[1]
    d = rho_r.shape[0]

    prob = SDPProblem(max_dim=max_dim)
    smoothed = _SmoothedState(prob, rho_r, ball)
    prob.add_block("S", d_b)
    prob.add_block("Z", d)
    prob.add_matrix_equality(
        {
            "Z": LinearMap.identity(d),
            "S": _left_tensor_map(rho_a, d_b).scaled(-1.0),
            smoothed.name: smoothed.as_map(),
        },
        np.zeros((d, d)),
        label="Z = rho_A x S - rho~",
    )
    if fix_marginal:
        prob.add_matrix_equality(
            {smoothed.name: smoothed.as_map(_partial_trace_map(dims_r, 0))}, rho_a, label="Tr_B rho~ = rho_A"
        )
    else:
        prob.add_trace_constraint({smoothed.name: smoothed.trace_coefficient()}, {}, "=", 1.0, label="tr rho~ = 1")
    if ball.metric == "generalized_trace":
        smoothed.add_trace_ball(prob, ball.eps, subnormalized=False)
    prob.minimize({"S": np.eye(d_b)})
    sol = _solve(prob, label)

    s = sol.blocks["S"]
    total = trace(s)
    state_r = smoothed.extract(sol)
    state, _ = embed(state_r, dims_r, 0, iso)
    dist = distance(state, rho, ball.metric)
    slack = min_eig(np.kron(partial_trace(rho, dims, [0]), s) - state)
    _recheck(label, dist, ball.eps, slack)
    value = log2_or_inf(total)
    logging.info(f"{label}({ball.metric}, ε={ball.eps}) = {value:.6f}")
    return QuantumMeasureResult(value, state, s / total, dist, slack, sol.residuals)


def imax_partial_quantum(rho, dims: Sequence[int], ball: SmoothingBall, max_dim: int = MAX_DIM):
    """I_max^{ε,Δ}(Ȧ;B): smoothed max-information with ρ̃_A = ρ_A."""
    return _imax_smoothed(rho, dims, ball, True, max_dim, "imax_partial")


def imax_full_quantum(rho, dims: Sequence[int], ball: SmoothingBall, max_dim: int = MAX_DIM):
    """I_max^{ε,Δ}(A;B): smoothed max-information, marginal free, reference ρ_A ⊗ σ_B."""
    return _imax_smoothed(rho, dims, ball, False, max_dim, "imax_full")


def _hmin_smoothed(rho, dims, ball: SmoothingBall, fix_marginal: bool, max_dim: int, label: str):
    rho, dims = _check_bipartite(rho, dims)
    if ball.eps == 0:
        return hmin_unsmoothed(rho, dims)
    iso = marginal_support(rho, dims, 1)
    rho_r, dims_r = restrict(rho, dims, 1, iso)
    rho_b = partial_trace(rho_r, dims_r, [1])
    d_a, d_b = dims_r
    d = rho_r.shape[0]

    prob = SDPProblem(max_dim=max_dim)
    smoothed = _SmoothedState(prob, rho_r, ball)
    prob.add_block("Z", d)
    prob.add_scalar("t")
    prob.add_matrix_equality(
        {"Z": LinearMap.identity(d), smoothed.name: smoothed.as_map()},
        np.zeros((d, d)),
        scalars={"t": -np.kron(np.eye(d_a), rho_b)},
        label="Z = t 1 x rho_B - rho~",
    )
    if fix_marginal:
        prob.add_block("Y", d_b)
        prob.add_matrix_equality(
            {"Y": LinearMap.identity(d_b), smoothed.name: smoothed.as_map(_partial_trace_map(dims_r, 1))},
            rho_b,
            label="Tr_A rho~ + Y = rho_B",
        )
    else:
        prob.add_trace_constraint({smoothed.name: smoothed.trace_coefficient()}, {}, "<=", 1.0, label="tr rho~ <= 1")
    if ball.metric == "generalized_trace":
        smoothed.add_trace_ball(prob, ball.eps, subnormalized=True)
    prob.minimize(scalars={"t": 1.0})
    sol = _solve(prob, label)

    t = sol.scalars["t"]
    state_r = smoothed.extract(sol)
    state, _ = embed(state_r, dims_r, 1, iso)
    reference = np.kron(np.eye(dims[0]), partial_trace(rho, dims, [1]))
    dist = distance(state, rho, ball.metric)
    slack = min_eig(t * reference - state)
    if fix_marginal:
        slack = min(slack, min_eig(partial_trace(rho, dims, [1]) - partial_trace(state, dims, [1])))
    _recheck(label, dist, ball.eps, slack)
    value = -log2_or_inf(t)
    logging.info(f"{label}({ball.metric}, ε={ball.eps}) = {value:.6f}")
    return QuantumMeasureResult(value, state, None, dist, slack, sol.residuals)


def hmin_partial_quantum(rho, dims: Sequence[int], ball: SmoothingBall, max_dim: int = MAX_DIM):
    """H_min^{ε,Δ}(A|Ḃ): smoothed min-entropy with Tr_A ρ̃ ⪯ ρ_B."""
    return _hmin_smoothed(rho, dims, ball, True, max_dim, "hmin_partial")


def hmin_full_quantum(rho, dims: Sequence[int], ball: SmoothingBall, max_dim: int = MAX_DIM):
    """H_min^{ε,Δ}(A|B): smoothed min-entropy over sub-normalized ρ̃, reference 1_A ⊗ ρ_B."""
    return _hmin_smoothed(rho, dims, ball, False, max_dim, "hmin_full")


def iid_bipartite(rho: np.ndarray, dims: Sequence[int], n: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    """ρ^{⊗n} regrouped as (A_1…A_n)(B_1…B_n)."""
    d_a, d_b = dims
    power = tensor_power(rho, n)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    regrouped = permute_systems(power, [d_a, d_b] * n, order)
    return regrouped, (d_a**n, d_b**n)


def first_order_trend(
    rho, dims: Sequence[int], eps: float, ns: Sequence[int] = (1, 2, 3), metric: str = "purified",
    max_dim: int = MAX_DIM,
):
    """
    Per-copy smoothed measures on ρ^{⊗n} next to I(A:B) and H(A|B).

    Powers whose SDP would exceed ``max_dim`` are reported as NaN.

    Returns:
        list of dicts with keys n, imax_rate, hmin_rate, mutual_information,
        conditional_entropy.
    """
    rho, dims = _check_bipartite(rho, dims)
    ball = SmoothingBall(metric, eps)
    info = mutual_information(rho, dims)
    cond = conditional_entropy(rho, dims)
    rows = []
    for n in ns:
        power, pdims = iid_bipartite(rho, dims, n)
        row = {"n": n, "mutual_information": info, "conditional_entropy": cond}
        try:
            row["imax_rate"] = imax_partial_quantum(power, pdims, ball, max_dim=max_dim).value / n
            row["hmin_rate"] = hmin_partial_quantum(power, pdims, ball, max_dim=max_dim).value / n
        except ResourceError as e:
            logging.warning(f"first_order_trend: n={n} skipped ({e})")
            row["imax_rate"] = np.nan
            row["hmin_rate"] = np.nan
        rows.append(row)
    return rows

"""
Explicit states behind the quantum equivalence bounds and the appendix
lemmas: the marginal-restoring rotation, the convex split mixture,
classical post-processing of cq-states, projective measurements and
coherent copies, each with a check that evaluates the matching inequality.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from src.linalg import hermitize, mat_sqrt_pinv, polar_unitary, positive_part, support_projector
from src.quantum_smooth.measures import (
    SmoothingBall,
    hmin_full_quantum,
    hmin_partial_quantum,
    imax_full_quantum,
    imax_partial_quantum,
)
from src.quantum_smooth.states import (
    as_state,
    distance,
    dmax_quantum,
    embed,
    local_operator,
    min_eig,
    partial_trace,
    permute_systems,
    purified_distance,
    tensor,
    tensor_power,
)
from src.reports import CheckReport
from src.spectrum import compositions, type_class_count
from src.util.config import MAX_CELLS, MAX_DIM
from src.util.errors import DomainError, ResourceError, UsageError

MARGINAL_TOL = 1e-8
SANDWICH_TOL = 1e-5
CLASSICAL_TOL = 1e-10


def equivalence_penalty(delta: float) -> float:
    """log2((8 + δ²)/δ²), the price of pinning a marginal."""
    return float(np.log2((8.0 + delta**2) / delta**2))


@dataclass
class HatConstruction:
    """
    State with a pinned marginal built from an unconstrained optimizer.

    Args:
        state: ρ̂_AB.
        projector: P^γ on the pinned system.
        unitary: Polar unitary V on the pinned system.
        marginal_residual: Spectral norm of ρ̂_pinned − ρ_pinned.
        distance: P(ρ̂, ρ).
        distance_bound: 2·P(ρ̃, ρ) + δ.
        dmax: D_max of ρ̂ against the reference operator.
        dmax_bound: Bound on ``dmax`` implied by the optimizer.
    """

    state: np.ndarray
    projector: np.ndarray
    unitary: np.ndarray
    marginal_residual: float
    distance: float
    distance_bound: float
    dmax: float
    dmax_bound: float


def _check_delta(eps: float, delta: float) -> None:
    if not (delta > 0 and eps >= 0 and 2 * eps + delta <= 1):
        raise DomainError(f"Need δ > 0 and 0 ≤ 2ε + δ ≤ 1 (got ε={eps}, δ={delta})")


def _rotate_onto_marginal(rho, rho_tilde, dims, system: int, delta: float):
    """
    Cuts ρ̃ down to P^γ = {ρ̃_S/γ − ρ_S}_+ (γ = δ²/8) and rotates the result so
    its marginal on ``system`` becomes ρ_S^{1/2} V Π V† ρ_S^{1/2}.

    Returns:
        (τ, ρ_S^{1/2}(1 − VΠV†)ρ_S^{1/2}, P^γ, V), Π being the support of ρ̄_S.
    """
    gamma = delta**2 / 8.0
    rho_s = partial_trace(rho, dims, [system])
    tilde_s = partial_trace(rho_tilde, dims, [system])
    proj = positive_part(tilde_s / gamma - rho_s)
    lifted = local_operator(proj, dims, system)
    rho_bar = hermitize(lifted @ rho_tilde @ lifted)
    bar_s = partial_trace(rho_bar, dims, [system])
    root = mat_sqrt_pinv(rho_s, "sqrt")
    v = polar_unitary(root @ mat_sqrt_pinv(bar_s, "sqrt"))
    k = local_operator(root @ v @ mat_sqrt_pinv(bar_s, "inv_sqrt_pinv"), dims, system)
    tau = hermitize(k @ rho_bar @ k.conj().T)
    kept = v @ support_projector(bar_s) @ v.conj().T
    residual = hermitize(root @ (np.eye(rho_s.shape[0]) - kept) @ root)
    return tau, residual, proj, v


def thm2_hat_construction(rho, rho_tilde, sigma_b, dims: Sequence[int], delta: float) -> HatConstruction:
    """
    ρ̂_AB = τ_AB + ρ_A^{1/2}(1 − VΠV†)ρ_A^{1/2} ⊗ σ_B, with ρ̂_A = ρ_A.

    Args:
        rho: Normalized ρ_AB.
        rho_tilde: Optimizer of the unpinned smooth max-information.
        sigma_b: Its optimizing σ_B (normalized).
        dims: (dA, dB).
        delta: δ > 0; γ = δ²/8.
    """
    rho = as_state(rho, dims, normalized=True)
    if not delta > 0:
        raise DomainError(f"δ must be positive, got {delta}")
    tau, residual, proj, v = _rotate_onto_marginal(rho, rho_tilde, dims, 0, delta)
    hat = hermitize(tau + np.kron(residual, sigma_b))

    rho_a = partial_trace(rho, dims, [0])
    reference = np.kron(rho_a, sigma_b)
    dmax_tilde = dmax_quantum(rho_tilde, reference)
    result = HatConstruction(
        state=hat,
        projector=proj,
        unitary=v,
        marginal_residual=float(np.linalg.norm(partial_trace(hat, dims, [0]) - rho_a, 2)),
        distance=purified_distance(hat, rho),
        distance_bound=2 * purified_distance(rho_tilde, rho) + delta,
        dmax=dmax_quantum(hat, reference),
        dmax_bound=dmax_tilde + equivalence_penalty(delta),
    )
    logging.info(
        f"thm2 construction: D_max {result.dmax:.6f} (bound {result.dmax_bound:.6f}), "
        f"P {result.distance:.6f} (bound {result.distance_bound:.6f})"
    )
    return result


def thm3_hat_construction(rho, rho_tilde, dims: Sequence[int], delta: float) -> HatConstruction:
    """
    ρ̂_AB = τ_AB + 1_A/|A| ⊗ ρ_B^{1/2}(1 − VΠV†)ρ_B^{1/2}, with ρ̂_B = ρ_B.

    ``dmax_bound`` uses max(D_max(ρ̃‖1_A ⊗ ρ_B), −log|A|), which covers
    sub-normalized optimizers as well.
    """
    rho = as_state(rho, dims, normalized=True)
    if not delta > 0:
        raise DomainError(f"δ must be positive, got {delta}")
    d_a = dims[0]
    tau, residual, proj, v = _rotate_onto_marginal(rho, rho_tilde, dims, 1, delta)
    hat = hermitize(tau + np.kron(np.eye(d_a) / d_a, residual))

    rho_b = partial_trace(rho, dims, [1])
    reference = np.kron(np.eye(d_a), rho_b)
    dmax_tilde = max(dmax_quantum(rho_tilde, reference), -float(np.log2(d_a)))
    result = HatConstruction(
        state=hat,
        projector=proj,
        unitary=v,
        marginal_residual=float(np.linalg.norm(partial_trace(hat, dims, [1]) - rho_b, 2)),
        distance=purified_distance(hat, rho),
        distance_bound=2 * purified_distance(rho_tilde, rho) + delta,
        dmax=dmax_quantum(hat, reference),
        dmax_bound=dmax_tilde + equivalence_penalty(delta),
    )
    logging.info(
        f"thm3 construction: D_max {result.dmax:.6f} (bound {result.dmax_bound:.6f}), "
        f"P {result.distance:.6f} (bound {result.distance_bound:.6f})"
    )
    return result


def _construction_slacks(hat: HatConstruction) -> dict:
    return {
        "construction marginal": MARGINAL_TOL - hat.marginal_residual,
        "construction distance": hat.distance_bound - hat.distance,
        "construction dmax": hat.dmax_bound - hat.dmax,
    }


def check_thm2_sandwich(rho, dims: Sequence[int], eps: float, delta: float, max_dim: int = MAX_DIM) -> CheckReport:
    """
    I_max^{2ε+δ,P}(Ȧ;B) ≤ I_max^{ε,P}(A;B) + log2((8+δ²)/δ²) and
    I_max^{ε,P}(Ȧ;B) ≥ I_max^{ε,P}(A;B), plus the construction certificates.
    """
    _check_delta(eps, delta)
    if 2 * eps + delta >= 1:
        raise DomainError(f"2ε + δ = {2 * eps + delta} leaves no valid purified ball")
    full = imax_full_quantum(rho, dims, SmoothingBall("purified", eps), max_dim=max_dim)
    pinned = imax_partial_quantum(rho, dims, SmoothingBall("purified", eps), max_dim=max_dim)
    widened = imax_partial_quantum(rho, dims, SmoothingBall("purified", 2 * eps + delta), max_dim=max_dim)
    hat = thm2_hat_construction(rho, full.state, full.sigma, dims, delta)
    penalty = equivalence_penalty(delta)
    slacks = {
        "partial(2e+d) <= full(e) + penalty": full.value + penalty - widened.value,
        "partial(e) >= full(e)": pinned.value - full.value,
        "partial(2e+d) <= construction dmax": hat.dmax - widened.value,
    }
    slacks.update(_construction_slacks(hat))
    quantities = {
        "imax_full": full.value,
        "imax_partial": pinned.value,
        "imax_partial_widened": widened.value,
        "penalty": penalty,
        "construction_dmax": hat.dmax,
        "construction_distance": hat.distance,
    }
    return CheckReport("thm2_sandwich", quantities, slacks, tol=SANDWICH_TOL)


def check_thm3_sandwich(rho, dims: Sequence[int], eps: float, delta: float, max_dim: int = MAX_DIM) -> CheckReport:
    """
    H_min^{2ε+δ,P}(A|Ḃ) ≥ H_min^{ε,P}(A|B) − log2((8+δ²)/δ²) and
    H_min^{ε,P}(A|Ḃ) ≤ H_min^{ε,P}(A|B), plus the construction certificates.
    """
    _check_delta(eps, delta)
    if 2 * eps + delta >= 1:
        raise DomainError(f"2ε + δ = {2 * eps + delta} leaves no valid purified ball")
    full = hmin_full_quantum(rho, dims, SmoothingBall("purified", eps), max_dim=max_dim)
    pinned = hmin_partial_quantum(rho, dims, SmoothingBall("purified", eps), max_dim=max_dim)
    widened = hmin_partial_quantum(rho, dims, SmoothingBall("purified", 2 * eps + delta), max_dim=max_dim)
    hat = thm3_hat_construction(rho, full.state, dims, delta)
    penalty = equivalence_penalty(delta)
    slacks = {
        "partial(2e+d) >= full(e) - penalty": widened.value - (full.value - penalty),
        "partial(e) <= full(e)": full.value - pinned.value,
        "partial(2e+d) >= -construction dmax": widened.value + hat.dmax,
    }
    slacks.update(_construction_slacks(hat))
    quantities = {
        "hmin_full": full.value,
        "hmin_partial": pinned.value,
        "hmin_partial_widened": widened.value,
        "penalty": penalty,
        "construction_dmax": hat.dmax,
        "construction_distance": hat.distance,
    }
    return CheckReport("thm3_sandwich", quantities, slacks, tol=SANDWICH_TOL)


@dataclass
class ConvexSplitPair:
    """τ_{AB_1…B_N} and the product ρ′_A ⊗ σ^{⊗N} it is compared with."""

    tau: np.ndarray
    reference: np.ndarray
    dims: Tuple[int, ...]


def convex_split_threshold(rho_prime, sigma_b, dims: Sequence[int], delta: float) -> int:
    """R = ⌈D_max(ρ′_AB‖ρ′_A ⊗ σ_B) + 2 log2(2/δ)⌉."""
    if not 0 < delta < 1:
        raise DomainError(f"δ must lie in (0, 1), got {delta}")
    rho_a = partial_trace(rho_prime, dims, [0])
    dmax = dmax_quantum(rho_prime, np.kron(rho_a, sigma_b))
    if not np.isfinite(dmax):
        raise DomainError("σ_B does not dominate ρ′_AB; no finite convex split threshold")
    return int(np.ceil(dmax + 2 * np.log2(2.0 / delta) - 1e-12))


def convex_split_state(rho, rho_prime, sigma_b, dims: Sequence[int], r: int, max_dim: int = MAX_DIM) -> ConvexSplitPair:
    """
    τ = 2^{-R} Σ_j ρ_{AB_j} ⊗ σ^{⊗(others)}, built densely.

    Raises:
        ResourceError: if |A|·|B|^{2^R} exceeds ``max_dim``.
    """
    d_a, d_b = (int(d) for d in dims)
    copies = 2**r
    total = d_a * d_b**copies
    if total > max_dim:
        raise ResourceError(f"Convex split state needs dimension {total} (cap {max_dim})")
    rho = as_state(rho, dims)
    rho_prime = as_state(rho_prime, dims)
    rest = tensor_power(sigma_b, copies - 1)
    base = np.kron(rho, rest)
    full_dims = [d_a] + [d_b] * copies
    tau = np.zeros((total, total), dtype=complex)
    for j in range(copies):
        # old factor 1 (the correlated B) lands on register j
        order = [0] + list(range(2, j + 2)) + [1] + list(range(j + 2, copies + 1))
        tau += permute_systems(base, full_dims, order)
    tau = hermitize(tau / copies)
    reference = np.kron(partial_trace(rho_prime, dims, [0]), tensor_power(sigma_b, copies))
    return ConvexSplitPair(tau, reference, tuple(full_dims))


def _is_diagonal(m: np.ndarray) -> bool:
    return bool(np.all(np.abs(m - np.diag(np.diag(m))) <= CLASSICAL_TOL))


def _convex_split_classical(rho, rho_prime, sigma_b, dims, r: int, metric: str, max_cells: int) -> float:
    """
    Type-class evaluation for diagonal inputs. With g(a, b) = ρ(a, b)/σ(b)
    and the B-registers i.i.d. σ under the reference, only the counts of each
    b matter:  T = ½ Σ_a E|mean g − ρ′_A(a)|,  F = Σ_a √ρ′_A(a) E√(mean g).
    """
    d_a, d_b = dims
    p = np.real(np.diag(rho)).reshape(d_a, d_b)
    s = np.real(np.diag(sigma_b))
    p_a = np.real(np.diag(partial_trace(rho_prime, dims, [0])))
    if np.any((p.sum(axis=0) > 0) & (s <= 0)):
        raise DomainError("σ_B does not cover the support of ρ_B")
    copies = 2**r
    support = s > 0
    k = int(support.sum())
    if type_class_count(copies, k) > max_cells:
        raise ResourceError(f"{type_class_count(copies, k):.3g} type classes (cap {max_cells})")
    comps = compositions(copies, k)
    log_weight = gammaln(copies + 1) - gammaln(comps + 1).sum(axis=1) + comps @ np.log(s[support])
    weight = np.exp(log_weight)
    g = p[:, support] / s[support]
    means = comps @ g.T / copies
    if metric == "generalized_trace":
        return float(min(1.0, 0.5 * np.sum(weight[:, None] * np.abs(means - p_a[None, :]))))
    fid = float(np.sum(np.sqrt(p_a) * (weight @ np.sqrt(means))))
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, fid) ** 2)))


def convex_split_distance(
    rho, rho_prime, sigma_b, dims: Sequence[int], r: int, metric: str = "generalized_trace",
    max_dim: int = MAX_DIM, max_cells: int = MAX_CELLS,
) -> float:
    """
    Δ(τ, ρ′_A ⊗ σ^{⊗2^R}) for the convex split mixture.

    Diagonal ρ, ρ′ and σ go through type-class aggregation, so thresholds
    of R ≈ 7 stay cheap; other inputs use the dense state under ``max_dim``.
    """
    metric = SmoothingBall(metric, 0.0).metric
    dims = tuple(int(d) for d in dims)
    rho = as_state(rho, dims)
    rho_prime = as_state(rho_prime, dims)
    if _is_diagonal(rho) and _is_diagonal(rho_prime) and _is_diagonal(sigma_b):
        return _convex_split_classical(rho, rho_prime, sigma_b, dims, r, metric, max_cells)
    pair = convex_split_state(rho, rho_prime, sigma_b, dims, r, max_dim=max_dim)
    return distance(pair.tau, pair.reference, metric)


def check_convex_split(
    rho, rho_prime, sigma_b, dims: Sequence[int], delta: float, metric: str = "generalized_trace",
    r: int = None, max_dim: int = MAX_DIM, max_cells: int = MAX_CELLS,
) -> CheckReport:
    """
    Δ(τ, ρ′_A ⊗ σ^{⊗2^R}) ≤ Δ(ρ, ρ′) + δ at R = threshold (or the given R).
    Below the threshold the inequality is only logged, never asserted.
    """
    metric = SmoothingBall(metric, 0.0).metric
    threshold = convex_split_threshold(rho_prime, sigma_b, dims, delta)
    r = threshold if r is None else r
    eps = distance(as_state(rho, dims), as_state(rho_prime, dims), metric)
    value = convex_split_distance(rho, rho_prime, sigma_b, dims, r, metric, max_dim, max_cells)
    quantities = {"R": r, "threshold": threshold, "eps": eps, "distance": value}
    slacks = {}
    if r >= threshold:
        slacks["distance <= eps + delta"] = eps + delta - value
    else:
        logging.info(f"convex split below threshold (R={r} < {threshold}): distance {value:.6f}")
    return CheckReport("convex_split", quantities, slacks, tol=1e-6)


def _check_cq(rho, dims) -> None:
    d_x, d_b = dims
    blocks = np.asarray(rho).reshape(d_x, d_b, d_x, d_b)
    off = blocks.copy()
    for x in range(d_x):
        off[x, :, x, :] = 0
    if np.max(np.abs(off), initial=0.0) > CLASSICAL_TOL:
        raise UsageError("State is not classical on the first system")


def cq_function_apply(rho, dims: Sequence[int], f: Sequence[int], size: int = None):
    """
    ω_ZB = Σ_x |f(x)⟩⟨f(x)| ⊗ ρ_B^x for a cq-state ρ_XB.

    Returns:
        (ω_ZB, (|Z|, |B|)).
    """
    dims = tuple(int(d) for d in dims)
    rho = as_state(rho, dims)
    _check_cq(rho, dims)
    d_x, d_b = dims
    f = np.asarray(f, dtype=int)
    if f.shape != (d_x,) or np.any(f < 0):
        raise UsageError(f"f must map each of the {d_x} symbols to a nonnegative index")
    d_z = int(size) if size is not None else int(f.max()) + 1
    if np.any(f >= d_z):
        raise UsageError(f"f takes values outside range({d_z})")
    blocks = rho.reshape(d_x, d_b, d_x, d_b)
    omega = np.zeros((d_z, d_b, d_z, d_b), dtype=complex)
    for x in range(d_x):
        omega[f[x], :, f[x], :] += blocks[x, :, x, :]
    return hermitize(omega.reshape(d_z * d_b, d_z * d_b)), (d_z, d_b)


def projective_measure_cq(rho, dims: Sequence[int], projectors: Sequence[np.ndarray], tol: float = 1e-9):
    """
    ω_ABX = Σ_x P_A^x ρ_AB P_A^x ⊗ |x⟩⟨x|_X.

    Raises:
        UsageError: if the projectors are not orthogonal projectors summing to 1_A.
    """
    dims = tuple(int(d) for d in dims)
    rho = as_state(rho, dims)
    d_a, d_b = dims
    projectors = [np.asarray(p, dtype=complex) for p in projectors]
    if not projectors or any(p.shape != (d_a, d_a) for p in projectors):
        raise UsageError(f"Need at least one {d_a}x{d_a} projector")
    if np.linalg.norm(sum(projectors) - np.eye(d_a)) > tol:
        raise UsageError("Projectors do not sum to the identity")
    if any(np.linalg.norm(p @ p - p) > tol or np.linalg.norm(p - p.conj().T) > tol for p in projectors):
        raise UsageError("Measurement operators are not orthogonal projectors")
    n = len(projectors)
    omega = np.zeros((d_a * d_b * n, d_a * d_b * n), dtype=complex)
    for x, p in enumerate(projectors):
        lifted = np.kron(p, np.eye(d_b))
        flag = np.zeros((n, n))
        flag[x, x] = 1.0
        omega += np.kron(lifted @ rho @ lifted, flag)
    return hermitize(omega), (d_a, d_b, n)


def check_projective_measurement(rho, dims: Sequence[int], sigma_b, projectors) -> CheckReport:
    """D_max(ρ_AB‖1_A ⊗ σ_B) ≤ D_max(ω_ABX‖1_A ⊗ σ_B ⊗ ω_X)."""
    omega, (d_a, d_b, n) = projective_measure_cq(rho, dims, projectors)
    omega_x = partial_trace(omega, (d_a, d_b, n), [2])
    before = dmax_quantum(as_state(rho, dims), np.kron(np.eye(d_a), sigma_b))
    after = dmax_quantum(omega, tensor(np.eye(d_a), sigma_b, omega_x))
    slack = after - before if np.isfinite(before) or np.isfinite(after) else np.inf
    return CheckReport("projective_measurement", {"dmax_before": before, "dmax_after": after}, {"dmax monotone": slack}, tol=1e-7)


def check_contraction(rho, dims: Sequence[int], contraction: np.ndarray) -> CheckReport:
    """Tr_B′[(1_A ⊗ L) ρ (1_A ⊗ L)†] ⪯ ρ_A for a contraction L: B → B′."""
    dims = tuple(int(d) for d in dims)
    rho = as_state(rho, dims)
    op = np.kron(np.eye(dims[0]), contraction)
    out = op @ rho @ op.conj().T
    reduced = partial_trace(out, (dims[0], contraction.shape[0]), [0])
    slack = min_eig(partial_trace(rho, dims, [0]) - reduced)
    return CheckReport("contraction", {"min_eig": slack}, {"reduced <= rho_A": slack}, tol=1e-10)


def check_function_monotonicity(rho, dims: Sequence[int], f: Sequence[int], eps: float, max_dim: int = MAX_DIM) -> CheckReport:
    """H_min^{ε,P}(Z|Ḃ)_ω ≤ H_min^{ε,P}(X|Ḃ)_ρ for ω_ZB = f applied to X."""
    omega, omega_dims = cq_function_apply(rho, dims, f)
    ball = SmoothingBall("purified", eps)
    before = hmin_partial_quantum(rho, dims, ball, max_dim=max_dim).value
    after = hmin_partial_quantum(omega, omega_dims, ball, max_dim=max_dim).value
    return CheckReport(
        "function_monotonicity", {"hmin_x": before, "hmin_z": after}, {"hmin_z <= hmin_x": before - after}, tol=1e-6
    )


def check_dimension_bound(rho, dims: Sequence[int], eps: float, max_dim: int = MAX_DIM) -> CheckReport:
    """H_min^{ε,P}(AB|Ṙ) ≤ H_min^{ε,P}(A|Ṙ) + log2|B| for ρ_ABR with dims (dA, dB, dR)."""
    d_a, d_b, d_r = (int(d) for d in dims)
    rho = as_state(rho, (d_a, d_b, d_r))
    ball = SmoothingBall("purified", eps)
    joint = hmin_partial_quantum(rho, (d_a * d_b, d_r), ball, max_dim=max_dim).value
    rho_ar = partial_trace(rho, (d_a, d_b, d_r), [0, 2])
    single = hmin_partial_quantum(rho_ar, (d_a, d_r), ball, max_dim=max_dim).value
    bound = single + float(np.log2(d_b))
    return CheckReport(
        "dimension_bound", {"hmin_ab": joint, "hmin_a": single}, {"hmin_ab <= hmin_a + log|B|": bound - joint}, tol=1e-6
    )


def coherent_copy(rho, dims: Sequence[int], system: int):
    """Applies |x⟩ ↦ |x⟩|x⟩ to ``system``; the copy is appended as the last factor."""
    dims = tuple(int(d) for d in dims)
    d = dims[system]
    iso = np.zeros((d * d, d))
    iso[np.arange(d) * (d + 1), np.arange(d)] = 1.0
    copied, copied_dims = embed(rho, dims, system, iso)
    split_dims = list(dims[:system]) + [d, d] + list(dims[system + 1 :])
    n = len(split_dims)
    order = [i for i in range(n) if i != system + 1] + [system + 1]
    moved = permute_systems(copied, split_dims, order)
    return moved, tuple(split_dims[i] for i in order)


def check_coherent_classical(rho, dims: Sequence[int], eps: float, max_dim: int = MAX_DIM) -> CheckReport:
    """
    I_max^{ε,P}(BXX′;Ȧ) ≤ I_max^{ε,P}(BX′;Ȧ) + log2|X| for ρ_{ABXX′}
    coherently classical on XX′ (dims (dA, dB, dX, dX)).
    """
    d_a, d_b, d_x, d_xp = (int(d) for d in dims)
    if d_x != d_xp:
        raise UsageError("X and X′ must have equal dimension")
    rho = as_state(rho, (d_a, d_b, d_x, d_xp))
    ball = SmoothingBall("purified", eps)
    joint = imax_partial_quantum(rho, (d_a, d_b * d_x * d_xp), ball, max_dim=max_dim).value
    dropped = partial_trace(rho, (d_a, d_b, d_x, d_xp), [0, 1, 3])
    single = imax_partial_quantum(dropped, (d_a, d_b * d_xp), ball, max_dim=max_dim).value
    bound = single + float(np.log2(d_x))
    return CheckReport(
        "coherent_classical",
        {"imax_bxx": joint, "imax_bx": single},
        {"imax_bxx <= imax_bx + log|X|": bound - joint},
        tol=1e-6,
    )

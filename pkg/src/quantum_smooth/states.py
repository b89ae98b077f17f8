"""
Density operators on tensor-factored spaces: validation, partial traces,
channels, distances, D_max and von Neumann quantities.

States are complex ``np.ndarray`` matrices accompanied by a ``dims`` tuple
listing the factor dimensions in order (e.g. ``(dA, dB)``).
"""

from typing import Iterable, Sequence, Tuple

import numpy as np

from src.linalg import (
    as_hermitian,
    eig_hermitian,
    hermitize,
    mat_sqrt_pinv,
    random_unitary,
    support_projector,
)
from src.util.errors import DomainError, UsageError

PSD_TOL = 1e-10
TRACE_TOL = 1e-10


def as_state(rho, dims: Sequence[int], normalized: bool = False) -> np.ndarray:
    """
    Validates a (sub-normalized) density operator.

    Args:
        rho: Square matrix.
        dims: Factor dimensions; their product must match the matrix size.
        normalized: Require trace 1 instead of trace ≤ 1.
    """
    rho = as_hermitian(rho, tol=1e-10)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise UsageError(f"dims {dims} do not match a {rho.shape[0]}-dimensional operator")
    w, _ = eig_hermitian(rho)
    if w.size and w[0] < -PSD_TOL:
        raise DomainError(f"State is not PSD (min eigenvalue {w[0]:.3e})")
    tr = float(np.trace(rho).real)
    if tr > 1 + TRACE_TOL:
        raise DomainError(f"State has trace {tr:.12f} > 1")
    if normalized and abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"State must be normalized, trace is {tr:.12f}")
    if not normalized and tr <= 0:
        raise DomainError("State has zero trace")
    return rho


def trace(rho: np.ndarray) -> float:
    return float(np.trace(rho).real)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """
    Traces out every factor not in ``keep``; kept factors stay in their order.
    """
    dims = list(dims)
    keep = sorted(set(keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise UsageError(f"Cannot keep factors {keep} of {n}")
    t = np.asarray(rho).reshape(dims + dims)
    current = n
    for i in reversed(range(n)):
        if i not in keep:
            t = np.trace(t, axis1=i, axis2=i + current)
            current -= 1
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def permute_systems(rho: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorders tensor factors so that new factor i is old factor order[i]."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    t = np.transpose(t, list(order) + [n + o for o in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def tensor(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def tensor_power(rho: np.ndarray, n: int) -> np.ndarray:
    return tensor(*([rho] * n))


def local_operator(op: np.ndarray, dims: Sequence[int], system: int) -> np.ndarray:
    """1 ⊗ ... ⊗ op ⊗ ... ⊗ 1 with ``op`` acting on ``system`` (op may change its dimension)."""
    return tensor(*[op if i == system else np.eye(d) for i, d in enumerate(dims)])


def apply_channel(rho: np.ndarray, kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Σ_k K_k ρ K_k†."""
    return hermitize(sum(k @ rho @ k.conj().T for k in kraus))


def apply_local_channel(
    rho: np.ndarray, dims: Sequence[int], system: int, kraus: Sequence[np.ndarray]
) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Applies a Kraus channel to one factor; returns the state and its new dims."""
    lifted = [local_operator(k, dims, system) for k in kraus]
    new_dims = list(dims)
    new_dims[system] = kraus[0].shape[0]
    return apply_channel(rho, lifted), tuple(new_dims)


def fidelity_generalized(rho: np.ndarray, tau: np.ndarray) -> float:
    """F(ρ, τ) = ‖√ρ√τ‖₁ + √((1 − trρ)(1 − trτ))."""
    if np.shape(rho) != np.shape(tau):
        raise UsageError(f"Dimension mismatch: {np.shape(rho)} vs {np.shape(tau)}")
    product = mat_sqrt_pinv(rho, "sqrt") @ mat_sqrt_pinv(tau, "sqrt")
    overlap = float(np.sum(np.linalg.svd(product, compute_uv=False)))
    completion = np.sqrt(max(0.0, 1.0 - trace(rho)) * max(0.0, 1.0 - trace(tau)))
    return float(min(1.0, max(0.0, overlap + completion)))


def purified_distance(rho: np.ndarray, tau: np.ndarray) -> float:
    return float(np.sqrt(max(0.0, 1.0 - fidelity_generalized(rho, tau) ** 2)))


def trace_norm(a: np.ndarray) -> float:
    w, _ = eig_hermitian(a)
    return float(np.sum(np.abs(w)))


def gen_trace_distance(rho: np.ndarray, tau: np.ndarray) -> float:
    """½‖ρ − τ‖₁ + ½|trρ − trτ|."""
    if np.shape(rho) != np.shape(tau):
        raise UsageError(f"Dimension mismatch: {np.shape(rho)} vs {np.shape(tau)}")
    value = 0.5 * trace_norm(rho - tau) + 0.5 * abs(trace(rho) - trace(tau))
    return float(min(1.0, max(0.0, value)))


def distance(rho: np.ndarray, tau: np.ndarray, metric: str) -> float:
    """Distance by metric name: "purified" (P) or "generalized_trace" (T)."""
    if metric in ("purified", "P"):
        return purified_distance(rho, tau)
    if metric in ("generalized_trace", "T"):
        return gen_trace_distance(rho, tau)
    raise UsageError(f"Unknown metric '{metric}'")


def dmax_quantum(rho: np.ndarray, sigma: np.ndarray) -> float:
    """
    D_max(ρ‖σ) = log2 λ_max(σ^{-1/2} ρ σ^{-1/2}) when supp ρ ⊆ supp σ, else +∞.
    """
    if np.shape(rho) != np.shape(sigma):
        raise UsageError(f"Dimension mismatch: {np.shape(rho)} vs {np.shape(sigma)}")
    dim = rho.shape[0]
    outside = np.eye(dim) - support_projector(sigma)
    leak = outside @ rho @ outside
    if np.linalg.norm(leak, 2) > dim * 1e-9:
        return np.inf
    root = mat_sqrt_pinv(sigma, "inv_sqrt_pinv")
    w, _ = eig_hermitian(root @ rho @ root)
    top = float(w[-1])
    if top <= 0:
        return -np.inf
    return float(np.log2(top))


def von_neumann_entropy(rho: np.ndarray) -> float:
    w, _ = eig_hermitian(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def mutual_information(rho: np.ndarray, dims: Sequence[int]) -> float:
    """I(A:B) = H(A) + H(B) − H(AB) for a bipartite state."""
    return (
        von_neumann_entropy(partial_trace(rho, dims, [0]))
        + von_neumann_entropy(partial_trace(rho, dims, [1]))
        - von_neumann_entropy(rho)
    )


def conditional_entropy(rho: np.ndarray, dims: Sequence[int]) -> float:
    """H(A|B) = H(AB) − H(B)."""
    return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, dims, [1]))


def marginal_support(rho: np.ndarray, dims: Sequence[int], system: int) -> np.ndarray:
    """Isometry (d × r) onto the support of the reduced state on ``system``."""
    reduced = partial_trace(rho, dims, [system])
    w, v = eig_hermitian(reduced)
    keep = w > reduced.shape[0] * max(float(np.max(np.abs(w))), 0.0) * 1e-12
    return v[:, keep]


def restrict(rho: np.ndarray, dims: Sequence[int], system: int, iso: np.ndarray):
    """Compresses one factor with V†·V; returns the state and its new dims."""
    op = local_operator(iso.conj().T, dims, system)
    new_dims = list(dims)
    new_dims[system] = iso.shape[1]
    return hermitize(op @ rho @ op.conj().T), tuple(new_dims)


def embed(rho: np.ndarray, dims: Sequence[int], system: int, iso: np.ndarray):
    """Applies an isometry V (d' × d) to one factor: (V ⊗ 1) ρ (V ⊗ 1)†."""
    op = local_operator(iso, dims, system)
    new_dims = list(dims)
    new_dims[system] = iso.shape[0]
    return hermitize(op @ rho @ op.conj().T), tuple(new_dims)


def pure_state(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).ravel()
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def maximally_entangled(d: int) -> np.ndarray:
    vec = np.eye(d).ravel() / np.sqrt(d)
    return pure_state(vec)


def random_state(dim: int, rng: np.random.Generator, rank: int = None) -> np.ndarray:
    """Random density operator from a Ginibre matrix of the given rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return pure_state(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_channel(d_in: int, d_out: int, n_kraus: int, rng: np.random.Generator):
    """Random CPTP map as Kraus operators (Σ K†K = 1) from a Haar isometry."""
    if d_out * n_kraus < d_in:
        raise UsageError("Need d_out · n_kraus ≥ d_in for an isometric dilation")
    iso = random_unitary(d_out * n_kraus, rng)[:, :d_in]
    return [iso[k * d_out : (k + 1) * d_out, :] for k in range(n_kraus)]


def random_contraction(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Random L with ‖L‖_∞ ≤ 1."""
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    return g / max(np.linalg.norm(g, 2), 1.0) * rng.uniform(0.2, 1.0)


def is_psd(a: np.ndarray, tol: float = 1e-9) -> bool:
    w, _ = eig_hermitian(a)
    return bool(w[0] >= -tol) if w.size else True


def min_eig(a: np.ndarray) -> float:
    w, _ = eig_hermitian(a)
    return float(w[0])

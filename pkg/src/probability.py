"""
Finite classical (sub-)distributions over product alphabets.

A distribution is an ``np.ndarray`` with one axis per factor, indexed
row-major over the ordered factor list (axis 0 is X, axis 1 is Y, ...).
"""

import logging
from typing import Iterable, Sequence

import numpy as np

from src.util.config import MAX_CELLS
from src.util.errors import ResourceError, UsageError

NORMALIZATION_TOL = 1e-12


def as_distribution(
    weights, normalized: bool = True, tol: float = NORMALIZATION_TOL
) -> np.ndarray:
    """
    Validates a weight table.

    Args:
        weights: Array-like of nonnegative reals, one axis per factor.
        normalized: Require total weight 1 (JointDistribution); otherwise
            only total weight ≤ 1 (SubJointDistribution).
        tol: Normalization tolerance.

    Returns:
        np.ndarray: float64 copy of the table.
    """
    p = np.array(weights, dtype=float)
    if p.ndim == 0 or p.size == 0:
        raise UsageError("Distribution needs at least one factor with one outcome")
    if not np.all(np.isfinite(p)):
        raise UsageError("Distribution has non-finite weights")
    if np.any(p < 0):
        raise UsageError(f"Negative weight {p.min():.3e} in distribution")
    total = float(p.sum())
    if normalized and abs(total - 1.0) > tol:
        raise UsageError(f"Distribution is not normalized (total {total:.15f})")
    if not normalized and total > 1.0 + tol:
        raise UsageError(f"Sub-distribution has total weight {total:.15f} > 1")
    return p


def _check_same_shape(p: np.ndarray, q: np.ndarray) -> None:
    if np.shape(p) != np.shape(q):
        raise UsageError(f"Shape mismatch: {np.shape(p)} vs {np.shape(q)}")


def marginal(p: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """
    Sums out every factor not listed in ``keep``.

    Args:
        p: (Sub-)distribution.
        keep: Axes to keep, in the order they should appear.

    Returns:
        np.ndarray: marginal with the kept axes in the requested order.
    """
    p = np.asarray(p, dtype=float)
    keep = list(keep)
    if not keep:
        raise UsageError("marginal needs a nonempty set of factors to keep")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= p.ndim for k in keep):
        raise UsageError(f"Invalid factor set {keep} for a {p.ndim}-factor table")
    drop = tuple(i for i in range(p.ndim) if i not in keep)
    m = p.sum(axis=drop) if drop else p
    remaining = [i for i in range(p.ndim) if i in keep]
    return np.transpose(m, [remaining.index(k) for k in keep])


def product(*factors: np.ndarray) -> np.ndarray:
    """Outer product P_1 × P_2 × ... of tables."""
    if not factors:
        raise UsageError("product needs at least one factor")
    out = np.asarray(factors[0], dtype=float)
    for f in factors[1:]:
        out = np.multiply.outer(out, np.asarray(f, dtype=float))
    return out


def generalized_trace_distance(p: np.ndarray, q: np.ndarray) -> float:
    """T(P, Q) = ½Σ|P − Q| + ½|ΣP − ΣQ|."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_same_shape(p, q)
    value = 0.5 * float(np.abs(p - q).sum()) + 0.5 * abs(float(p.sum() - q.sum()))
    return min(max(value, 0.0), 1.0)


def iid_power(p: np.ndarray, n: int, max_cells: int = MAX_CELLS) -> np.ndarray:
    """
    n-fold product P^{×n}, grouped per factor.

    For a joint P over X×Y the result is indexed by (x̄, ȳ), with x̄ and ȳ
    flattened row-major over the n positions.

    Raises:
        ResourceError: if the output would hold more than ``max_cells`` weights.
    """
    p = np.asarray(p, dtype=float)
    if n < 1:
        raise UsageError(f"iid_power needs n ≥ 1, got {n}")
    cells = float(p.size) ** n
    if cells > max_cells:
        raise ResourceError(
            f"P^(x{n}) would have {cells:.3g} cells (cap {max_cells}); "
            "use the type-class path of spectrum.d_s_iid_exact"
        )
    k = p.ndim
    out = p
    for _ in range(n - 1):
        grown = np.multiply.outer(out, p)
        # interleave axes (a_1..a_k, b_1..b_k) -> (a_1 b_1, ..., a_k b_k)
        order = [ax for i in range(k) for ax in (i, k + i)]
        grown = np.transpose(grown, order)
        out = grown.reshape([out.shape[i] * p.shape[i] for i in range(k)])
    logging.debug(f"iid_power: n={n}, shape={out.shape}")
    return out


def event_gap_distance(p: np.ndarray, q: np.ndarray, max_outcomes: int = 20) -> float:
    """
    max_S |P(S) − Q(S)| by enumerating every subset S of outcomes.

    Only meaningful for normalized inputs, where it equals ½‖P − Q‖₁.
    """
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise UsageError(f"Shape mismatch: {p.shape} vs {q.shape}")
    m = p.size
    if m > max_outcomes:
        raise ResourceError(f"event_gap_distance enumerates 2^{m} subsets (cap 2^{max_outcomes})")
    diff = p - q
    bits = 1 << np.arange(m, dtype=np.int64)
    best = 0.0
    chunk = 1 << 16
    for start in range(0, 1 << m, chunk):
        masks = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)
        members = (masks[:, None] & bits[None, :]) != 0
        best = max(best, float(np.max(np.abs(members @ diff))))
    return best


def apply_stochastic(p: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    """
    Applies the stochastic map W[a, a'] = Pr(a' | a) to one factor of P.

    Sub-stochastic maps (row sums ≤ 1) are accepted.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != p.shape[axis]:
        raise UsageError(f"Map of shape {w.shape} does not act on axis {axis} of {p.shape}")
    out = np.tensordot(p, w, axes=([axis], [0]))
    return np.moveaxis(out, -1, axis)


def apply_function(p: np.ndarray, f: Sequence[int], axis: int, size: int = None) -> np.ndarray:
    """Pushes factor ``axis`` through the function a ↦ f[a] into an alphabet of ``size``."""
    f = np.asarray(f, dtype=int)
    size = int(f.max()) + 1 if size is None else size
    w = np.zeros((len(f), size))
    w[np.arange(len(f)), f] = 1.0
    return apply_stochastic(p, w, axis)


def conditional(p: np.ndarray, given: int) -> np.ndarray:
    """P(rest | given) with rows of zero mass left at zero."""
    p = np.asarray(p, dtype=float)
    m = marginal(p, [given])
    shape = [1] * p.ndim
    shape[given] = -1
    denom = m.reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, p / np.where(denom > 0, denom, 1.0), 0.0)
    return out

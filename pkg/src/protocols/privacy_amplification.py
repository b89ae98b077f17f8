"""
Privacy amplification against classical side information, executed exactly.

For P_XY with |X| = 2^n and the Toeplitz family, every seed is enumerated
to build

    ω_SZY(s, z, y) = |S|^{-1} Σ_{x: f_s(x) = z} P(x, y)

and the composable security value T(ω_SZY, U_S × U_Z × P_Y) is returned
exactly.
"""

import logging
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from src.classical_smooth import as_joint, check_eps, hmin_partial_classical
from src.probability import marginal
from src.protocols.hashing import ToeplitzHashFamily
from src.quantum_smooth.measures import SmoothingBall, hmin_partial_quantum
from src.reports import CheckReport, ProtocolReport
from src.spectrum import d_max_classical
from src.util.config import MAX_CELLS, MAX_DIM
from src.util.errors import DomainError, UsageError


def input_bits(p: np.ndarray) -> int:
    nx = p.shape[0]
    n = int(round(np.log2(nx)))
    if 1 << n != nx:
        raise UsageError(f"|X| = {nx} is not a power of two")
    return n


def hmin_unsmoothed_classical(p) -> float:
    """H_min(X|Y) = −D_max(P_XY‖1_X × P_Y) = −log2 max_{x,y} P(x|y)."""
    p = as_joint(p)
    reference = np.broadcast_to(marginal(p, [1]), p.shape)
    return -d_max_classical(p, reference)


def leftover_hash_bound(hmin: float, ell: int) -> float:
    """½·√(2^ℓ · 2^{−H_min}), capped at 1."""
    return float(min(1.0, 0.5 * np.sqrt(2.0 ** (ell - hmin))))


def security_value(p, ell: int, max_cells: int = MAX_CELLS) -> float:
    """Exact T(ω_SZY, U_S × U_Z × P_Y) for the Toeplitz family with ℓ output bits."""
    p = as_joint(p)
    n = input_bits(p)
    family = ToeplitzHashFamily(n, ell)
    table = family.table(max_cells=max_cells)
    n_seeds = table.shape[0]
    n_out = 1 << ell
    p_y = marginal(p, [1])
    # hashed[s, z, y] = Σ_{x: f_s(x) = z} P(x, y)
    hashed = np.zeros((n_seeds, n_out, p.shape[1]))
    seeds = np.arange(n_seeds)
    for x in range(p.shape[0]):
        hashed[seeds, table[:, x], :] += p[x]
    gap = np.abs(hashed - p_y[None, None, :] / n_out).sum()
    return float(min(1.0, 0.5 * gap / n_seeds))


def privacy_amplify_exact(p, ell: int, max_cells: int = MAX_CELLS) -> ProtocolReport:
    """
    Hashes X down to ℓ bits with every Toeplitz seed and compares the exact
    security value with the leftover hash bound ½√(2^ℓ · 2^{−H_min(X|Y)}).

    Args:
        p: P_XY with |X| = 2^n.
        ell: Output bits, 0 ≤ ℓ ≤ n.
    """
    p = as_joint(p)
    n = input_bits(p)
    hmin = hmin_unsmoothed_classical(p)
    error = security_value(p, ell, max_cells=max_cells)
    bound = leftover_hash_bound(hmin, ell)
    logging.info(f"privacy amplification n={n}, ℓ={ell}: T={error:.6f} (leftover bound {bound:.6f})")
    return ProtocolReport(
        protocol="privacy-amplification",
        error=error,
        target_error=bound,
        resource=float(ell),
        resource_bound=float(n),
        details={"n": n, "hmin": hmin, "seeds": ToeplitzHashFamily(n, ell).size},
    )


def _key_length(hmin_inner: float, delta: float, n: int) -> int:
    ell = int(np.ceil(hmin_inner - np.log2(1.0 / (4 * delta**2)) - 1e-12))
    return int(min(n, max(0, ell)))


def _check_eps_delta(eps: float, delta: float) -> None:
    if not 0 < delta <= eps:
        raise DomainError(f"Need δ ∈ (0, ε] (got ε={eps}, δ={delta})")
    check_eps(eps)


def pa_key_length(p, eps: float, delta: float) -> int:
    """ℓ = max(0, ⌈H_min^{ε−δ,T}(X|Ẏ) − log2(1/(4δ²))⌉), at most n."""
    p = as_joint(p)
    _check_eps_delta(eps, delta)
    return _key_length(hmin_partial_classical(p, eps - delta).value, delta, input_bits(p))


def pa_run(p, eps: float, delta: float, max_cells: int = MAX_CELLS) -> ProtocolReport:
    """
    Smoothed run: key length from :func:`pa_key_length`, exact error against
    ε and the key length against the converse H_min^{ε,T}(X|Ẏ).
    """
    p = as_joint(p)
    _check_eps_delta(eps, delta)
    inner = hmin_partial_classical(p, eps - delta).value
    ell = _key_length(inner, delta, input_bits(p))
    error = security_value(p, ell, max_cells=max_cells)
    upper = hmin_partial_classical(p, eps).value
    logging.info(f"privacy amplification run ε={eps}, δ={delta}: ℓ={ell}, T={error:.6f}, converse {upper:.6f}")
    return ProtocolReport(
        protocol="privacy-amplification",
        error=error,
        target_error=eps,
        resource=float(ell),
        resource_bound=upper,
        details={"delta": delta, "hmin_eps_minus_delta": inner},
        tol=1e-6,
    )


def pa_sweep(p, ells: Iterable[int] = None, max_cells: int = MAX_CELLS) -> pd.DataFrame:
    """
    Security value for every key length.

    Returns:
        pd.DataFrame with columns ell, error, leftover_bound.
    """
    p = as_joint(p)
    n = input_bits(p)
    hmin = hmin_unsmoothed_classical(p)
    ells = range(n + 1) if ells is None else ells
    rows = [
        {"ell": ell, "error": security_value(p, ell, max_cells=max_cells), "leftover_bound": leftover_hash_bound(hmin, ell)}
        for ell in ells
    ]
    return pd.DataFrame(rows, columns=["ell", "error", "leftover_bound"])


def pa_converse_check(p, eps: float, ells: Sequence[int] = None, max_cells: int = MAX_CELLS) -> CheckReport:
    """Every key length whose exact error is ≤ ε satisfies ℓ ≤ H_min^{ε,T}(X|Ẏ) + 1e-6."""
    check_eps(eps)
    sweep = pa_sweep(p, ells, max_cells=max_cells)
    upper = hmin_partial_classical(p, eps).value
    secure = sweep[sweep["error"] <= eps + 1e-12]
    longest = int(secure["ell"].max()) if not secure.empty else 0
    monotone = float(np.min(np.diff(sweep["error"].to_numpy()), initial=0.0))
    return CheckReport(
        "pa_converse",
        {"hmin_eps": upper, "longest_secure": longest},
        {"longest_secure <= hmin": upper - longest, "error monotone in ell": monotone},
        tol=1e-6,
    )


def pa_quantum_bounds(rho, dims: Sequence[int], eps: float, delta: float, max_dim: int = MAX_DIM) -> dict:
    """
    Key-length window against quantum side information:
    H_min^{ε−δ,P}(X|Ḃ) − log2(1/δ⁴) ≤ ℓ ≤ H_min^{ε,P}(X|Ḃ).
    """
    if not 0 < delta <= eps:
        raise DomainError(f"Need δ ∈ (0, ε] (got ε={eps}, δ={delta})")
    upper = hmin_partial_quantum(rho, dims, SmoothingBall("purified", eps), max_dim=max_dim).value
    inner = hmin_partial_quantum(rho, dims, SmoothingBall("purified", eps - delta), max_dim=max_dim).value
    lower = inner - 4 * np.log2(1.0 / delta)
    return {"lower": float(lower), "upper": float(upper), "hmin_eps": upper, "hmin_eps_minus_delta": inner}

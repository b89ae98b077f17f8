"""
One-shot state merging of a pure ψ_ABR: resource windows only.

A holder of A sends its share to B with R as the reference. The entanglement
cost E and classical cost C are bracketed by partially smoothed measures of
the reduced state ρ_AR; no decoding is simulated.
"""

import logging
from typing import Dict, Sequence

import numpy as np

from src.quantum_smooth.measures import SmoothingBall, hmin_partial_quantum, imax_partial_quantum
from src.quantum_smooth.states import as_state, partial_trace, permute_systems
from src.util.config import MAX_DIM
from src.util.errors import DomainError, UsageError

PURITY_TOL = 1e-8


def merging_cost_bounds(psi, dims: Sequence[int], eps: float, delta: float, max_dim: int = MAX_DIM) -> Dict[str, float]:
    """
    Entanglement and classical cost windows for merging A into B.

        −H_min^{ε,P}(A|Ṙ) ≤ E ≤ −H_min^{ε−δ,P}(A|Ṙ) + log2(1/δ⁴)
        I_max^{ε,P}(Ṙ;A) ≤ C ≤ I_max^{ε−δ,P}(Ṙ;A) + log2(1/δ⁴)

    Args:
        psi: Pure state ψ_ABR as a density matrix.
        dims: (d_A, d_B, d_R).
        eps: Smoothing radius.
        delta: Slack δ ∈ (0, ε].
        max_dim: SDP dimension cap.
    Returns:
        dict with entanglement_lower/upper and classical_lower/upper.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise UsageError(f"Merging needs dims (d_A, d_B, d_R), got {dims}")
    if not 0 < delta <= eps:
        raise DomainError(f"Need δ ∈ (0, ε] (got ε={eps}, δ={delta})")
    psi = as_state(psi, dims, normalized=True)
    purity = float(np.trace(psi @ psi).real)
    if abs(purity - 1.0) > PURITY_TOL:
        raise DomainError(f"ψ_ABR must be pure (tr ψ² = {purity:.10f})")

    d_a, _, d_r = dims
    rho_ar = partial_trace(psi, dims, [0, 2])
    rho_ra = permute_systems(rho_ar, (d_a, d_r), [1, 0])
    penalty = 4 * float(np.log2(1.0 / delta))

    def hmin(radius: float) -> float:
        return hmin_partial_quantum(rho_ar, (d_a, d_r), SmoothingBall("purified", radius), max_dim=max_dim).value

    def imax(radius: float) -> float:
        return imax_partial_quantum(rho_ra, (d_r, d_a), SmoothingBall("purified", radius), max_dim=max_dim).value

    bounds = {
        "entanglement_lower": -hmin(eps),
        "entanglement_upper": -hmin(eps - delta) + penalty,
        "classical_lower": imax(eps),
        "classical_upper": imax(eps - delta) + penalty,
    }
    logging.info(
        f"merging ε={eps}, δ={delta}: E ∈ [{bounds['entanglement_lower']:.4f}, {bounds['entanglement_upper']:.4f}], "
        f"C ∈ [{bounds['classical_lower']:.4f}, {bounds['classical_upper']:.4f}]"
    )
    return {k: float(v) for k, v in bounds.items()}

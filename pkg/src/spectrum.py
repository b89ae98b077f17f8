"""
Information-spectrum divergences, Kullback-Leibler quantities and their
Gaussian second-order expansion.

All logarithms are base 2.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Tuple

import numpy as np
import pandas as pd
from scipy.special import gammaln
from scipy.stats import norm

from src.probability import marginal, product
from src.util.config import MAX_CELLS
from src.util.errors import DomainError, ResourceError, UsageError

TIE_TOL = 1e-12


class LikelihoodAtoms(NamedTuple):
    """Distinct log-ratios log2(P/Q) on supp(P) with their P-mass, ascending."""

    values: np.ndarray
    masses: np.ndarray
    infinite_mass: float


@dataclass(frozen=True)
class SecondOrderPrediction:
    rate: float
    variance: float
    eps: float
    n: int

    @property
    def value(self) -> float:
        """Predicted D_s^ε(P^n‖Q^n)/n = D + √(V/n)·Φ⁻¹(ε)."""
        return self.rate + np.sqrt(self.variance / self.n) * gaussian_cdf_inv(self.eps)


def _check_pair(p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise UsageError(f"Shape mismatch: {p.shape} vs {q.shape}")
    return p.ravel(), q.ravel()


def _merge_ties(values: np.ndarray, masses: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if values.size == 0:
        return values, masses
    order = np.argsort(values, kind="stable")
    values = values[order]
    masses = masses[order]
    gaps = np.diff(values) > TIE_TOL * np.maximum(1.0, np.abs(values[1:]))
    group = np.concatenate([[0], np.cumsum(gaps)])
    merged_masses = np.bincount(group, weights=masses)
    first = np.concatenate([[0], np.flatnonzero(gaps) + 1])
    return values[first], merged_masses


def likelihood_atoms(p: np.ndarray, q: np.ndarray) -> LikelihoodAtoms:
    p, q = _check_pair(p, q)
    support = p > 0
    infinite = support & (q <= 0)
    finite = support & ~infinite
    values = np.log2(p[finite]) - np.log2(q[finite])
    values, masses = _merge_ties(values, p[finite])
    return LikelihoodAtoms(values, masses, float(p[infinite].sum()))


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise DomainError(f"ε must be positive, got {eps}")


def d_s_from_atoms(atoms: LikelihoodAtoms, eps: float) -> float:
    """
    inf{a : Pr[log-ratio > a] < ε} by scanning the sorted atoms.

    Returns +∞ when the infinite-ratio mass alone reaches ε and -∞ when the
    total mass is already below ε (only possible for ε > 1).
    """
    _check_eps(eps)
    values, masses, infinite_mass = atoms
    # mass strictly above values[j] is the suffix sum starting at j + 1
    suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
    total = float(suffix[0]) + infinite_mass
    if total < eps:
        return -np.inf
    above = suffix[1:] + infinite_mass
    hits = np.flatnonzero(above < eps)
    if hits.size == 0:
        return np.inf
    return float(values[hits[0]])


def d_s(p: np.ndarray, q: np.ndarray, eps: float) -> float:
    """
    Information-spectrum divergence D_s^ε(P‖Q).

    Args:
        p: Normalized distribution.
        q: Reference weights of the same shape (may be unnormalized, e.g. 1_X × P_Y).
        eps: Tail threshold, ε > 0. Values above 1 are accepted and give -∞.
    """
    return d_s_from_atoms(likelihood_atoms(p, q), eps)


def d_max_classical(p: np.ndarray, q: np.ndarray) -> float:
    """log2 max_x P(x)/Q(x) over supp(P); +∞ when Q does not dominate P."""
    atoms = likelihood_atoms(p, q)
    if atoms.infinite_mass > 0:
        return np.inf
    if atoms.values.size == 0:
        return -np.inf
    return float(atoms.values[-1])


def i_s(p: np.ndarray, eps: float) -> float:
    """I_s^ε(X;Y) = D_s^ε(P_XY‖P_X × P_Y)."""
    return d_s(p, product(marginal(p, [0]), marginal(p, [1])), eps)


def i_s_given_q(p: np.ndarray, q_y: np.ndarray, eps: float) -> float:
    """I_s^ε(X;Y)_{P|Q} = D_s^ε(P_XY‖P_X × Q_Y)."""
    return d_s(p, product(marginal(p, [0]), q_y), eps)


def h_s(p: np.ndarray, eps: float) -> float:
    """H_s^ε(X|Y) = −D_s^ε(P_XY‖1_X × P_Y)."""
    p = np.asarray(p, dtype=float)
    ref = np.broadcast_to(marginal(p, [1]), p.shape)
    return -d_s(p, ref, eps)


def kl_and_variance(p: np.ndarray, q: np.ndarray) -> Tuple[float, float]:
    """
    Kullback-Leibler divergence D(P‖Q) and information variance V(P‖Q).

    Raises:
        DomainError: if P is not dominated by Q.
    """
    p, q = _check_pair(p, q)
    support = p > 0
    if np.any(q[support] <= 0):
        raise DomainError("P is not dominated by Q")
    log_ratio = np.log2(p[support]) - np.log2(q[support])
    d = float(np.dot(p[support], log_ratio))
    v = float(np.dot(p[support], (log_ratio - d) ** 2))
    return d, max(v, 0.0)


def gaussian_cdf(x: float) -> float:
    return float(norm.cdf(x))


def gaussian_cdf_inv(eps: float) -> float:
    """Φ⁻¹(ε) of the standard normal distribution."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"Φ⁻¹ needs ε in (0, 1), got {eps}")
    return float(norm.ppf(eps))


def second_order_prediction(p: np.ndarray, q: np.ndarray, n: int, eps: float) -> SecondOrderPrediction:
    d, v = kl_and_variance(p, q)
    return SecondOrderPrediction(rate=d, variance=v, eps=eps, n=n)


def compositions(n: int, k: int) -> np.ndarray:
    """All count vectors of k nonnegative parts summing to n, one per row."""
    counts = np.zeros((1, 0), dtype=np.int64)
    remaining = np.array([n], dtype=np.int64)
    for _ in range(k - 1):
        reps = remaining + 1
        parent = np.repeat(np.arange(remaining.size), reps)
        starts = np.cumsum(reps) - reps
        value = np.arange(int(reps.sum()), dtype=np.int64) - np.repeat(starts, reps)
        counts = np.column_stack([counts[parent], value])
        remaining = remaining[parent] - value
    return np.column_stack([counts, remaining])


def type_class_count(n: int, k: int) -> float:
    """C(n + k − 1, k − 1) as a float."""
    return float(np.exp(gammaln(n + k) - gammaln(k) - gammaln(n + 1)))


def iid_atoms(
    p: np.ndarray, q: np.ndarray, n: int, max_cells: int = MAX_CELLS
) -> LikelihoodAtoms:
    """
    Likelihood atoms of (P^{×n}, Q^{×n}) aggregated by type class.

    Symbols sharing a log-ratio are merged first; only the distribution of the
    summed log-ratio under P^{×n} matters, so the merge is exact.
    """
    if n < 1:
        raise UsageError(f"n must be ≥ 1, got {n}")
    base = likelihood_atoms(p, q)
    log_ratios = list(base.values)
    masses = list(base.masses)
    if base.infinite_mass > 0:
        log_ratios.append(np.inf)
        masses.append(base.infinite_mass)
    log_ratios = np.asarray(log_ratios)
    masses = np.asarray(masses)
    k = masses.size
    classes = type_class_count(n, k)
    if classes > max_cells:
        raise ResourceError(f"{classes:.3g} type classes for n={n}, k={k} (cap {max_cells})")
    comps = compositions(n, k)
    log_mass = gammaln(n + 1) - gammaln(comps + 1).sum(axis=1) + comps @ np.log(masses)
    weight = np.exp(log_mass)
    finite = np.isfinite(log_ratios)
    value = comps[:, finite] @ log_ratios[finite]
    infinite_hit = comps[:, ~finite].sum(axis=1) > 0 if np.any(~finite) else np.zeros(len(comps), bool)
    values, merged = _merge_ties(value[~infinite_hit], weight[~infinite_hit])
    logging.debug(f"iid_atoms: n={n}, k={k}, {len(comps)} type classes")
    return LikelihoodAtoms(values, merged, float(weight[infinite_hit].sum()))


def d_s_iid_exact(
    p: np.ndarray, q: np.ndarray, n: int, eps: float, max_cells: int = MAX_CELLS
) -> float:
    """D_s^ε(P^{×n}‖Q^{×n}) without materializing the product space."""
    return d_s_from_atoms(iid_atoms(p, q, n, max_cells=max_cells), eps)


def second_order_table(
    p: np.ndarray, eps: float, ns: Iterable[int], max_cells: int = MAX_CELLS
) -> pd.DataFrame:
    """
    Exact mutual-information spectrum rates against the Gaussian expansion.

    Columns: n, exact_rate, predicted_rate, residual, normalized_residual
    (residual · n / log2 n).
    """
    p = np.asarray(p, dtype=float)
    q = product(marginal(p, [0]), marginal(p, [1]))
    rows = []
    for n in ns:
        exact = d_s_iid_exact(p, q, n, eps, max_cells=max_cells) / n
        predicted = second_order_prediction(p, q, n, eps).value
        residual = abs(exact - predicted)
        normalized = residual * n / np.log2(n) if n > 1 else np.nan
        rows.append(
            {
                "n": n,
                "exact_rate": exact,
                "predicted_rate": predicted,
                "residual": residual,
                "normalized_residual": normalized,
            }
        )
        logging.info(f"second order n={n}: exact={exact:.6f} predicted={predicted:.6f}")
    return pd.DataFrame(rows)

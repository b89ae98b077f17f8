"""
Classical state splitting by rejection sampling.

Alice holds x ~ P_X and shares i.i.d. samples Y_1, …, Y_N ~ Q with Bob.
She accepts sample i with probability P′(Y_i|x) / (2^K · Q(Y_i)) and sends
the first accepted index, or 0 when every sample was rejected; on 0 Bob
falls back to one extra shared sample. Here (P′, Q) is the optimizer of
I_max^{ε−δ,T}(Ẋ;Y) = K, R = K + log2 log2(1/δ) and N = 2^⌈R⌉, so the
message takes 2^⌈R⌉ + 1 values and fits in ⌈R⌉ + 1 bits.

Each step accepts with probability 2^{−K}, so Bob's output is exactly

    P″_{Y|x} = (1 − γ)·P′_{Y|x} + γ·Q_Y,   γ = (1 − 2^{−K})^N.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from src.classical_smooth import SmoothedMeasureResult, as_joint, check_eps, imax_partial_classical
from src.probability import generalized_trace_distance, marginal, product
from src.reports import ProtocolReport
from src.spectrum import d_max_classical, i_s
from src.statistics.analysis import (
    binomial_interval,
    chi_square_sanity,
    empirical_counts,
    empirical_distance,
    rate_z_score,
)
from src.util.errors import DomainError
from src.util.utils import make_rng

ZERO_COST_TOL = 1e-9
BATCH_SIZE = 20_000


@dataclass
class SplitPlan:
    """Everything both parties agree on before the first message."""

    k: float
    r: float
    r_int: int
    n_samples: int
    gamma: float
    smoothed: np.ndarray
    q: np.ndarray

    @property
    def message_values(self) -> int:
        """Indices 1..N plus the failure symbol 0."""
        return self.n_samples + 1 if self.n_samples else 1

    @property
    def message_bits(self) -> int:
        return int(np.ceil(np.log2(self.message_values)))

    def acceptance(self) -> np.ndarray:
        """a[x, y] = P′(y|x) / (2^K · Q(y)), clipped to [0, 1]; zero where Q(y) = 0."""
        p_x = self.smoothed.sum(axis=1)
        cond = np.divide(self.smoothed, p_x[:, None], out=np.zeros_like(self.smoothed), where=p_x[:, None] > 0)
        scale = 2.0**self.k * self.q[None, :]
        ratio = np.divide(cond, scale, out=np.zeros_like(cond), where=scale > 0)
        return np.clip(ratio, 0.0, 1.0)

    def output_distribution(self) -> np.ndarray:
        """P″_XY = (1 − γ)·P′ + γ·P_X × Q."""
        p_x = self.smoothed.sum(axis=1)
        return (1.0 - self.gamma) * self.smoothed + self.gamma * product(p_x, self.q)


def _check_eps_delta(eps: float, delta: float) -> None:
    check_eps(eps)
    if not 0 < delta <= eps or delta >= 1:
        raise DomainError(f"State splitting needs δ ∈ (0, ε] with δ < 1 (got ε={eps}, δ={delta})")


def split_plan(p, eps: float, delta: float) -> SplitPlan:
    """
    Solves I_max^{ε−δ,T}(Ẋ;Y) and derives the sample count and failure rate.

    Args:
        p: P_XY.
        eps: Target error ε.
        delta: Slack δ ∈ (0, ε].
    Returns:
        SplitPlan
    """
    p = as_joint(p)
    _check_eps_delta(eps, delta)
    inner: SmoothedMeasureResult = imax_partial_classical(p, eps - delta)
    k = max(inner.value, 0.0)
    q = np.clip(inner.q, 0.0, None)
    q = q / q.sum()
    if k < ZERO_COST_TOL:
        # P′ = P_X × Q: Bob's shared sample is already correctly distributed
        return SplitPlan(k=0.0, r=0.0, r_int=0, n_samples=0, gamma=1.0, smoothed=inner.optimizer, q=q)
    r = k + float(np.log2(np.log2(1.0 / delta)))
    # R < 0 happens for δ > 1/2; N ≥ 2^R keeps γ ≤ δ
    r_int = max(0, int(np.ceil(r - 1e-12)))
    n_samples = 2**r_int
    gamma = float((1.0 - 2.0 ** (-k)) ** n_samples)
    logging.info(f"split plan: K={k:.6f}, R={r:.6f}, ⌈R⌉={r_int}, N={n_samples}, γ={gamma:.3e}")
    return SplitPlan(k=k, r=r, r_int=r_int, n_samples=n_samples, gamma=gamma, smoothed=inner.optimizer, q=q)


def state_split_exact(p, eps: float, delta: float) -> ProtocolReport:
    """
    Exact error and communication of the rejection-sampling protocol.

    The report also carries the converse quantities of the same run:
    I_max^{ε,T}(Ẋ;Y) ≤ log2(N + 1) and D_max(P″‖P_X × Q) ≤ log2(N + 1). The
    communication bound is ⌈R⌉ + 1, which stays below R + 2.
    """
    p = as_joint(p)
    plan = split_plan(p, eps, delta)
    output = plan.output_distribution()
    error = generalized_trace_distance(output, p)
    marginal_gap = float(np.abs(marginal(output, [0]) - marginal(p, [0])).max())

    if plan.n_samples == 0:
        resource, bound = 0.0, 0.0
        extra = {}
    else:
        resource = float(np.log2(plan.n_samples + 1))
        bound = plan.r_int + 1.0
        outer = imax_partial_classical(p, eps).value
        run_dmax = d_max_classical(output, product(marginal(p, [0]), plan.q))
        extra = {
            "ceil(R) < R + 1": max(plan.r, 0.0) + 1.0 - plan.r_int,
            "imax_eps <= log(N+1)": resource - outer,
            "dmax(P''||P_X x Q) <= log(N+1)": resource - run_dmax,
        }
    extra["X marginal preserved"] = -marginal_gap

    logging.info(f"state splitting ε={eps}, δ={delta}: T={error:.6f}, bits={resource:.4f} (bound {bound:.4f})")
    return ProtocolReport(
        protocol="state-splitting",
        error=error,
        target_error=eps,
        resource=resource,
        resource_bound=bound,
        details={
            "K": plan.k,
            "R": plan.r,
            "R_int": plan.r_int,
            "N": plan.n_samples,
            "gamma": plan.gamma,
            "message_bits": plan.message_bits,
            "delta": delta,
        },
        tol=1e-9,
        optimizer=output,
        extra_slacks=extra,
    )


@dataclass
class SplitSample:
    """
    Monte-Carlo execution of the protocol.

    Args:
        x: Alice's inputs, one per trial.
        message: Index sent (1..N) or 0 on failure.
        y: Bob's outputs.
        plan: The agreed plan.
        stats: Acceptance rate, confidence band, z-score, χ² and empirical T.
    """

    x: np.ndarray
    message: np.ndarray
    y: np.ndarray
    plan: SplitPlan
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return int(self.x.size)

    def transcript(self) -> bytes:
        """Byte string of (x, message, y) triples; identical seeds give identical bytes."""
        return np.stack([self.x, self.message, self.y], axis=1).astype(np.int64).tobytes()


def _run_batch(rng: np.random.Generator, plan: SplitPlan, p_x: np.ndarray, accept: np.ndarray, size: int):
    x = rng.choice(p_x.size, size=size, p=p_x)
    message = np.zeros(size, dtype=np.int64)
    y = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    for i in range(1, plan.n_samples + 1):
        # Shared samples are drawn for every trial so the stream does not depend on earlier acceptances
        shared = rng.choice(plan.q.size, size=size, p=plan.q)
        coins = rng.random(size)
        hit = active & (coins < accept[x, shared])
        message[hit] = i
        y[hit] = shared[hit]
        active &= ~hit
    fallback = rng.choice(plan.q.size, size=size, p=plan.q)
    y[active] = fallback[active]
    return x, message, y


def state_split_sample(p, eps: float, delta: float, trials: int, seed: int = 0) -> SplitSample:
    """
    Runs the protocol ``trials`` times with a seeded Philox generator.

    Args:
        p: P_XY.
        eps: Target error ε.
        delta: Slack δ.
        trials: Number of independent executions; 0 gives an empty sample.
        seed: Generator seed.
    Returns:
        SplitSample with the empirical acceptance statistics.
    """
    p = as_joint(p)
    plan = split_plan(p, eps, delta)
    p_x = marginal(p, [0])
    accept = plan.acceptance()
    rng = make_rng(seed)

    parts = []
    done = 0
    while done < trials:
        size = min(BATCH_SIZE, trials - done)
        parts.append(_run_batch(rng, plan, p_x, accept, size))
        done += size
    if parts:
        x, message, y = (np.concatenate(a) for a in zip(*parts))
    else:
        x = message = y = np.zeros(0, dtype=np.int64)
    sample = SplitSample(x=x, message=message, y=y, plan=plan)
    if trials == 0:
        return sample

    exact = plan.output_distribution()
    counts = empirical_counts([x, y], p.shape)
    stats = {"trials": trials, "exact_T": generalized_trace_distance(exact, p), "empirical_T": empirical_distance(counts, p)}
    if plan.n_samples:
        # First-step acceptance is Bernoulli(2^{−K}) for every x
        first = int(np.count_nonzero(message == 1))
        rate = 2.0 ** (-plan.k)
        low, high = binomial_interval(first, trials)
        failures = int(np.count_nonzero(message == 0))
        f_low, f_high = binomial_interval(failures, trials)
        stats.update(
            {
                "first_accept_rate": first / trials,
                "accept_rate_expected": rate,
                "accept_low": low,
                "accept_high": high,
                "accept_z": rate_z_score(first, trials, rate),
                "failure_rate": failures / trials,
                "gamma": plan.gamma,
                "failure_low": f_low,
                "failure_high": f_high,
            }
        )
    chi = chi_square_sanity(counts, exact)
    stats.update({"chi2": chi["statistic"], "chi2_p_value": chi["p_value"], "chi2_cells": chi["cells"]})
    sample.stats = stats
    logging.info(
        f"state splitting sample: {trials} trials, empirical T={stats['empirical_T']:.4f} (exact {stats['exact_T']:.4f})"
    )
    return sample


def split_spectrum_bounds(p, eps: float, delta: float) -> Dict[str, float]:
    """
    Information-spectrum window for the optimal rate:
    I_s^{ε/(1−δ)}(X;Y) − log2(1/δ) ≤ R ≤ I_s^{ε−3δ}(X;Y) + 2·log2(1/δ).

    The upper end is NaN unless ε − 3δ > 0.
    """
    p = as_joint(p)
    _check_eps_delta(eps, delta)
    log_inv = float(np.log2(1.0 / delta))
    lower = i_s(p, eps / (1.0 - delta)) - log_inv
    upper = i_s(p, eps - 3 * delta) + 2 * log_inv if eps - 3 * delta > 0 else np.nan
    return {"lower": float(lower), "upper": float(upper)}

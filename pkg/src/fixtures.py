"""
Seeded instance generators shared by the theorem checks and the tests.

Every generator takes a ``numpy.random.Generator``; callers derive one
per fixture with ``make_rng(seed, stream)``.
"""

from typing import List

import numpy as np

from src.quantum_smooth.states import pure_state, random_pure_state, random_state, tensor
from src.util.errors import UsageError

CORRELATED_BITS = np.array([[0.45, 0.05], [0.05, 0.45]])


def correlated_bits(flip: float = 0.1) -> np.ndarray:
    """Uniform X with Y = X flipped with probability ``flip``."""
    return np.array([[0.5 * (1 - flip), 0.5 * flip], [0.5 * flip, 0.5 * (1 - flip)]])


def random_distribution(shape, rng: np.random.Generator, sparsity: float = 0.0) -> np.ndarray:
    """
    Dirichlet(1, …, 1) table; with ``sparsity`` > 0 each cell is zeroed
    with that probability (at least one cell survives).
    """
    p = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    if sparsity > 0:
        mask = rng.random(p.shape) >= sparsity
        if not mask.any():
            mask.flat[rng.integers(mask.size)] = True
        p = p * mask
        p = p / p.sum()
    return p


def random_stochastic(n_in: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic W[in, out]."""
    return rng.dirichlet(np.ones(n_out), size=n_in)


def random_function(n_in: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, n_out, size=n_in)


def uniform_independent(n_bits: int, ny: int = 2) -> np.ndarray:
    """X uniform over 2^n values, independent of a uniform Y."""
    return np.full((1 << n_bits, ny), 1.0 / ((1 << n_bits) * ny))


def block_uniform(n_bits: int, hmin_bits: int, ny: int = 2) -> np.ndarray:
    """
    Y uniform; given y, X uniform over 2^{hmin_bits} values (a shifted block),
    so H_min(X|Y) = hmin_bits exactly.
    """
    if not 0 <= hmin_bits <= n_bits:
        raise UsageError(f"Need 0 ≤ hmin_bits ≤ n_bits (got {hmin_bits}, {n_bits})")
    nx, block = 1 << n_bits, 1 << hmin_bits
    p = np.zeros((nx, ny))
    for y in range(ny):
        rows = (np.arange(block) + y * block) % nx
        p[rows, y] += 1.0 / (block * ny)
    return p


def random_cq_distribution(n_bits: int, ny: int, rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    """P_XY with |X| = 2^n and Dirichlet(concentration) cells."""
    nx = 1 << n_bits
    return rng.dirichlet(np.full(nx * ny, concentration)).reshape(nx, ny)


def random_two_qubit_state(rng: np.random.Generator, rank: int = None) -> np.ndarray:
    return random_state(4, rng, rank=rank)


def werner_state(weight: float, d: int = 2) -> np.ndarray:
    """w·|Φ⁺⟩⟨Φ⁺| + (1 − w)·1/d²."""
    if not 0 <= weight <= 1:
        raise UsageError(f"Werner weight must lie in [0, 1], got {weight}")
    phi = pure_state(np.eye(d).ravel())
    return weight * phi + (1 - weight) * np.eye(d * d) / (d * d)


def correlated_qubits(flip: float = 0.1) -> np.ndarray:
    """Diagonal two-qubit state holding :func:`correlated_bits`."""
    return np.diag(correlated_bits(flip).ravel()).astype(complex)


def classical_quantum_state(p_x: np.ndarray, states: List[np.ndarray]) -> np.ndarray:
    """Σ_x p(x)·|x⟩⟨x| ⊗ ρ_x."""
    if len(p_x) != len(states):
        raise UsageError(f"{len(p_x)} probabilities for {len(states)} conditional states")
    d_b = states[0].shape[0]
    out = np.zeros((len(p_x) * d_b, len(p_x) * d_b), dtype=complex)
    for x, (px, rho_x) in enumerate(zip(p_x, states)):
        ket = np.zeros((len(p_x), len(p_x)))
        ket[x, x] = 1.0
        out += px * tensor(ket, rho_x)
    return out


def random_cq_state(n_bits: int, d_b: int, rng: np.random.Generator) -> np.ndarray:
    """Random ρ_XB with |X| = 2^n and Ginibre conditional states."""
    nx = 1 << n_bits
    p_x = rng.dirichlet(np.ones(nx))
    return classical_quantum_state(p_x, [random_state(d_b, rng) for _ in range(nx)])


def random_tripartite_pure(dims, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure ψ_ABR as a density matrix."""
    return random_pure_state(int(np.prod(dims)), rng)

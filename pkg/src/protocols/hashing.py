"""
Toeplitz hashing over GF(2).

A seed s of n + ℓ − 1 bits defines the ℓ×n matrix T[i, j] = s[i − j + n − 1]
and the hash f_s(x) = T·x mod 2. Inputs and outputs are integers whose
binary expansion (most significant bit first) is the bit vector.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.util.config import MAX_CELLS
from src.util.errors import ResourceError, UsageError


def int_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    """Rows of MSB-first bits, shape values.shape + (width,)."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_int(bits: np.ndarray) -> np.ndarray:
    width = bits.shape[-1]
    weights = (1 << np.arange(width - 1, -1, -1, dtype=np.int64)) if width else np.zeros(0, np.int64)
    return bits.astype(np.int64) @ weights


@dataclass(frozen=True)
class ToeplitzHashFamily:
    """
    Args:
        n: Input bits.
        ell: Output bits, 0 ≤ ℓ ≤ n.
    """

    n: int
    ell: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.ell <= self.n:
            raise UsageError(f"Toeplitz family needs n ≥ 1 and 0 ≤ ℓ ≤ n (got n={self.n}, ℓ={self.ell})")

    @property
    def seed_bits(self) -> int:
        return self.n + self.ell - 1 if self.ell > 0 else 0

    @property
    def size(self) -> int:
        return 1 << self.seed_bits

    def matrix(self, seed: int) -> np.ndarray:
        """ℓ×n Toeplitz matrix of one seed."""
        if not 0 <= seed < self.size:
            raise UsageError(f"Seed {seed} outside [0, {self.size})")
        s = int_to_bits(np.array(seed), self.seed_bits)
        i = np.arange(self.ell)[:, None]
        j = np.arange(self.n)[None, :]
        return s[i - j + self.n - 1]

    def hash(self, seed: int, x: int) -> int:
        bits = int_to_bits(np.array(x), self.n)
        return int(bits_to_int(self.matrix(seed) @ bits % 2))

    def table(self, max_cells: int = MAX_CELLS) -> np.ndarray:
        """
        f_s(x) for every seed and input, shape (2^{seed bits}, 2^n).

        Raises:
            ResourceError: when the table would exceed ``max_cells`` entries.
        """
        cells = self.size * (1 << self.n) * max(self.ell, 1)
        if cells > max_cells:
            raise ResourceError(f"Hash table needs {cells} cells (cap {max_cells})")
        inputs = int_to_bits(np.arange(1 << self.n), self.n)
        if self.ell == 0:
            return np.zeros((1, 1 << self.n), dtype=np.int64)
        seeds = int_to_bits(np.arange(self.size), self.seed_bits)
        i = np.arange(self.ell)[:, None]
        j = np.arange(self.n)[None, :]
        mats = seeds[:, i - j + self.n - 1]
        out = np.einsum("sij,xj->sxi", mats.astype(np.int64), inputs.astype(np.int64)) % 2
        logging.debug(f"Toeplitz table: {self.size} seeds, n={self.n}, ℓ={self.ell}")
        return bits_to_int(out)


def collision_matrix(family: ToeplitzHashFamily, max_cells: int = MAX_CELLS) -> np.ndarray:
    """Pr_s[f_s(x) = f_s(x′)] for every input pair (diagonal is 1)."""
    table = family.table(max_cells=max_cells)
    n_inputs = table.shape[1]
    if table.shape[0] * n_inputs * n_inputs > max_cells:
        raise ResourceError(f"Collision check needs {table.shape[0] * n_inputs**2} cells (cap {max_cells})")
    return (table[:, :, None] == table[:, None, :]).mean(axis=0)


def two_universality_gap(family: ToeplitzHashFamily, max_cells: int = MAX_CELLS) -> float:
    """
    max over x ≠ x′ of Pr_s[f_s(x) = f_s(x′)] − 2^{−ℓ}; ≤ 0 means two-universal.
    """
    collisions = collision_matrix(family, max_cells=max_cells)
    off = ~np.eye(collisions.shape[0], dtype=bool)
    gap = float(collisions[off].max() - 2.0 ** (-family.ell)) if off.any() else -np.inf
    logging.info(f"Toeplitz n={family.n}, ℓ={family.ell}: worst collision gap {gap:.3e}")
    return gap

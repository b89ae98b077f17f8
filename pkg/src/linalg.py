"""
Dense hermitian matrix kernels used by every quantum computation.

Matrices are plain ``numpy`` arrays. ``as_hermitian`` validates external
input; internal code calls ``hermitize`` to absorb roundoff from products.
"""

import logging
from typing import Literal, Tuple

import numpy as np

from src.util.errors import DomainError, NumericalFailure, UsageError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


def hermitize(a: np.ndarray) -> np.ndarray:
    """Returns (A + A†)/2."""
    a = np.asarray(a)
    return (a + a.conj().T) / 2


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """
    Validates a square matrix as hermitian and stores its hermitian part.

    Args:
        a: Square array-like, real or complex.
        tol: Largest accepted entry of |A - A†|.

    Returns:
        np.ndarray: complex hermitian matrix.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise UsageError(f"Expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError("Matrix has non-finite entries")
    residual = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if residual > tol:
        raise UsageError(f"Matrix is not hermitian (residual {residual:.3e})")
    return hermitize(a)


def _jacobi_rotation(app: float, aqq: float, r: float) -> Tuple[float, float]:
    phi = (aqq - app) / (2.0 * r)
    if phi >= 0:
        t = 1.0 / (phi + np.sqrt(phi * phi + 1.0))
    else:
        t = -1.0 / (-phi + np.sqrt(phi * phi + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def eig_jacobi(
    a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigensolver for complex hermitian matrices.

    Each rotation first removes the phase of the pivot a_pq and then applies
    the real symmetric Jacobi rotation that annihilates it.

    Returns:
        (eigenvalues ascending, eigenvectors as columns)
    """
    a = np.array(hermitize(a), dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for sweep in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= tol * scale:
            logging.debug(f"Jacobi converged after {sweep} sweeps (dim={n})")
            w = np.real(np.diag(a))
            order = np.argsort(w, kind="stable")
            return w[order], v[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= 1e-300 or r <= tol * scale * 1e-3:
                    continue
                phase = a[p, q] / r
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, r)
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    raise NumericalFailure(
        f"Jacobi eigensolver did not converge in {max_sweeps} sweeps", best=(a, v)
    )


def eig_hermitian(
    a: np.ndarray, method: Literal["lapack", "jacobi"] = "lapack"
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition A = V diag(λ) V† of a hermitian matrix.

    Args:
        a: Hermitian matrix.
        method: "lapack" (``numpy.linalg.eigh``) or "jacobi" (cyclic Jacobi,
            kept as an independent reference kernel).

    Returns:
        (eigenvalues ascending, unitary eigenvector matrix)
    """
    a = hermitize(a)
    if method == "jacobi":
        return eig_jacobi(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        logging.error(f"eigh failed: {e}")
        raise NumericalFailure(f"Eigensolver failed: {e}") from e
    return w, v


def _rank_threshold(w: np.ndarray) -> float:
    if w.size == 0:
        return 0.0
    return w.size * float(np.max(np.abs(w))) * 1e-12


def mat_sqrt_pinv(
    a: np.ndarray, kind: Literal["sqrt", "inv_sqrt_pinv"] = "sqrt"
) -> np.ndarray:
    """
    Square root or pseudo-inverse square root of a PSD matrix.

    Eigenvalues down to -1e-10 are treated as roundoff and clipped to zero.
    The pseudo-inverse keeps eigenvalues above dim * max|λ| * 1e-12, so
    B A B is the projector onto the support of A.
    """
    w, v = eig_hermitian(a)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -PSD_TOL * scale:
        raise DomainError(f"Matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    if kind == "sqrt":
        f = np.sqrt(w)
    elif kind == "inv_sqrt_pinv":
        keep = w > _rank_threshold(w)
        f = np.zeros_like(w)
        f[keep] = 1.0 / np.sqrt(w[keep])
    else:
        raise UsageError(f"Unknown kind '{kind}'")
    return hermitize((v * f) @ v.conj().T)


def support_projector(a: np.ndarray) -> np.ndarray:
    """Projector onto the support of a PSD matrix (same threshold as the pseudo-inverse)."""
    w, v = eig_hermitian(a)
    keep = w > _rank_threshold(w)
    vk = v[:, keep]
    return hermitize(vk @ vk.conj().T)


def positive_part(a: np.ndarray, tol: float = None) -> np.ndarray:
    """
    Projector {A}_+ onto the eigenspaces of A with strictly positive eigenvalue.

    Args:
        a: Hermitian matrix.
        tol: Eigenvalues at or below ``tol`` count as non-positive; defaults
            to dim * max|λ| * 1e-14 so exact zeros stay in the kernel.
    """
    w, v = eig_hermitian(a)
    if tol is None:
        tol = w.size * (float(np.max(np.abs(w))) if w.size else 0.0) * 1e-14
    vk = v[:, w > tol]
    return hermitize(vk @ vk.conj().T)


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """
    Unitary V of the polar decomposition with tr[M V] = tr|M|.

    With M = U Σ W†, V = W U† on the range; on the kernel the complement of
    range(M†) is mapped onto the complement of range(M) by the unitary
    closest to the identity, so singular inputs give a deterministic V.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"polar_unitary needs a square matrix, got {m.shape}")
    u, s, wh = np.linalg.svd(m)
    w = wh.conj().T
    rank = int(np.sum(s > _rank_threshold(s)))
    v = w[:, :rank] @ u[:, :rank].conj().T
    if rank < m.shape[0]:
        u0 = u[:, rank:]
        w0 = w[:, rank:]
        a, _, bh = np.linalg.svd(u0.conj().T @ w0)
        omega = bh.conj().T @ a.conj().T
        v = v + w0 @ omega @ u0.conj().T
    return v


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitize(g)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))

"""
Small dense semidefinite programs.

``SDPProblem`` is a modeling layer: named hermitian PSD blocks, named
nonnegative scalars, scalar constraints written as trace pairings, and
matrix equalities written with Kraus-form linear maps (expanded entrywise
into real rows). ``solve_sdp`` runs an infeasible primal-dual interior
point method (HKM direction, Mehrotra predictor-corrector) on real
symmetric blocks; complex hermitian blocks are realified to 2d×2d.

Primal:  min Σ⟨C_k, X_k⟩ + cᵀs  s.t.  Σ⟨A_ik, X_k⟩ + a_iᵀs = b_i,  X_k ⪰ 0, s ≥ 0
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, qr, solve_triangular

from src.util.config import MAX_DIM
from src.util.errors import NumericalFailure, ResourceError, UsageError

GAP_TOL = 1e-9
FEAS_TOL = 1e-9
ACCEPT_GAP = 1e-6
ACCEPT_FEAS = 1e-7
INFEASIBLE_AUX = 1e-6
STEP_FACTOR = 0.98


@dataclass
class LinearMap:
    """
    X ↦ Σ_c coef_c · K_c X K_c†, with K_c of shape (out_dim, in_dim).
    """

    coefs: np.ndarray
    kraus: np.ndarray

    @classmethod
    def identity(cls, dim: int, coef: float = 1.0) -> "LinearMap":
        return cls(np.array([coef]), np.eye(dim)[None, :, :])

    @classmethod
    def from_terms(cls, terms: Sequence[Tuple[float, np.ndarray]]) -> "LinearMap":
        coefs = np.array([float(c) for c, _ in terms])
        kraus = np.stack([np.asarray(k, dtype=complex) for _, k in terms])
        return cls(coefs, kraus)

    @property
    def in_dim(self) -> int:
        return self.kraus.shape[2]

    @property
    def out_dim(self) -> int:
        return self.kraus.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("c,cpi,ij,cqj->pq", self.coefs, self.kraus, x, self.kraus.conj())

    def scaled(self, factor: float) -> "LinearMap":
        return LinearMap(self.coefs * factor, self.kraus)

    def entry_functionals(self) -> np.ndarray:
        """G[p, q] with L(X)_pq = tr(G[p, q] X), shape (out, out, in, in)."""
        return np.einsum("c,cpi,cqj->pqji", self.coefs, self.kraus, self.kraus.conj())


@dataclass
class _RowChunk:
    blocks: Dict[str, np.ndarray]
    scalars: Dict[str, np.ndarray]
    rhs: np.ndarray
    label: str


@dataclass
class SDPSolution:
    """
    Args:
        status: "optimal" or "infeasible".
        value: Primal objective (auxiliary big-M term excluded).
        blocks: Optimal hermitian blocks by name.
        scalars: Optimal scalars by name.
        duals: Multipliers of the (independent) constraint rows.
        primal_infeasibility, dual_infeasibility, relative_gap: Residual triple.
    """

    status: str
    value: float
    dual_value: float
    blocks: Dict[str, np.ndarray] = field(default_factory=dict)
    scalars: Dict[str, float] = field(default_factory=dict)
    duals: Optional[np.ndarray] = None
    primal_infeasibility: float = np.nan
    dual_infeasibility: float = np.nan
    relative_gap: float = np.nan
    iterations: int = 0

    @property
    def residuals(self) -> Tuple[float, float, float]:
        return self.primal_infeasibility, self.dual_infeasibility, self.relative_gap


class SDPProblem:
    """Named-block SDP builder."""

    def __init__(self, max_dim: int = MAX_DIM):
        self.block_dims: Dict[str, int] = {}
        self.scalar_names: List[str] = []
        self.objective_blocks: Dict[str, np.ndarray] = {}
        self.objective_scalars: Dict[str, float] = {}
        self.chunks: List[_RowChunk] = []
        self.max_dim = max_dim

    def add_block(self, name: str, dim: int) -> str:
        if name in self.block_dims or name in self.scalar_names:
            raise UsageError(f"Variable '{name}' defined twice")
        self.block_dims[name] = int(dim)
        if self.total_dim > self.max_dim:
            raise ResourceError(f"SDP total PSD dimension {self.total_dim} exceeds cap {self.max_dim}")
        return name

    def add_scalar(self, name: str) -> str:
        if name in self.block_dims or name in self.scalar_names:
            raise UsageError(f"Variable '{name}' defined twice")
        self.scalar_names.append(name)
        return name

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims.values())

    def minimize(self, blocks: Dict[str, np.ndarray] = None, scalars: Dict[str, float] = None) -> None:
        """Objective Σ tr(C_k X_k) + Σ c_s s."""
        for name, c in (blocks or {}).items():
            self._check_block(name, c)
            self.objective_blocks[name] = np.asarray(c, dtype=complex)
        for name, c in (scalars or {}).items():
            self._check_scalar(name)
            self.objective_scalars[name] = float(c)

    def add_trace_constraint(
        self,
        blocks: Dict[str, np.ndarray],
        scalars: Dict[str, float],
        sense: str,
        rhs: float,
        label: str = "",
    ) -> None:
        """Σ tr(A_k X_k) + Σ a_s s  (= | <= | >=)  rhs, A_k hermitian."""
        if sense not in ("=", "<=", ">="):
            raise UsageError(f"Unknown sense '{sense}'")
        coefs = {}
        for name, a in blocks.items():
            self._check_block(name, a)
            coefs[name] = np.asarray(a, dtype=complex)[None, :, :]
        scal = {}
        for name, a in scalars.items():
            self._check_scalar(name)
            scal[name] = np.array([float(a)])
        if sense != "=":
            slack = self.add_scalar(f"_slack{len(self.scalar_names)}")
            scal[slack] = np.array([1.0 if sense == "<=" else -1.0])
        self.chunks.append(_RowChunk(coefs, scal, np.array([float(rhs)]), label))

    def add_matrix_equality(
        self,
        maps: Dict[str, LinearMap],
        rhs: np.ndarray,
        scalars: Dict[str, np.ndarray] = None,
        label: str = "",
    ) -> None:
        """
        Σ_k L_k(X_k) + Σ_s s·M_s = R for hermitian R, one real row per
        independent real entry (Re on and above the diagonal, Im above).
        """
        rhs = np.asarray(rhs, dtype=complex)
        dim = rhs.shape[0]
        iu, ju = np.triu_indices(dim)
        off = iu != ju
        blocks = {}
        for name, lmap in maps.items():
            if name not in self.block_dims:
                raise UsageError(f"Unknown block '{name}'")
            if lmap.in_dim != self.block_dims[name] or lmap.out_dim != dim:
                raise UsageError(
                    f"Map for '{name}' is {lmap.out_dim}x{lmap.in_dim}, "
                    f"expected {dim}x{self.block_dims[name]}"
                )
            g = lmap.entry_functionals()
            g_pq = g[iu, ju]
            g_qp = g[ju, iu]
            re = (g_pq + g_qp) / 2
            im = ((g_pq - g_qp) / 2j)[off]
            blocks[name] = np.concatenate([re, im])
        scal = {}
        for name, m in (scalars or {}).items():
            self._check_scalar(name)
            m = np.asarray(m, dtype=complex)
            scal[name] = np.concatenate([m[iu, ju].real, m[iu, ju].imag[off]])
        b = np.concatenate([rhs[iu, ju].real, rhs[iu, ju].imag[off]])
        self.chunks.append(_RowChunk(blocks, scal, b, label))

    def _check_block(self, name: str, a: np.ndarray) -> None:
        if name not in self.block_dims:
            raise UsageError(f"Unknown block '{name}'")
        d = self.block_dims[name]
        if np.shape(a) != (d, d):
            raise UsageError(f"Coefficient for '{name}' has shape {np.shape(a)}, expected ({d}, {d})")

    def _check_scalar(self, name: str) -> None:
        if name not in self.scalar_names:
            raise UsageError(f"Unknown scalar '{name}'")


def _realify(a: np.ndarray) -> np.ndarray:
    """Hermitian (…, d, d) → real symmetric (…, 2d, 2d) with ⟨R(A)/2, R(X)⟩ = tr(AX)."""
    re, im = a.real, a.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _unrealify(w: np.ndarray) -> np.ndarray:
    d = w.shape[0] // 2
    w11, w12, w21, w22 = w[:d, :d], w[:d, d:], w[d:, :d], w[d:, d:]
    x = ((w11 + w22) + 1j * (w21 - w12)) / 2
    return (x + x.conj().T) / 2


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest α with X + α dX ⪰ 0 (X positive definite)."""
    try:
        lower = np.linalg.cholesky(x)
        w = solve_triangular(lower, dx, lower=True)
        w = solve_triangular(lower, w.T, lower=True).T
        lam = np.linalg.eigvalsh(_sym(w))[0]
    except (np.linalg.LinAlgError, LinAlgError):
        return 0.0
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lin(s: np.ndarray, ds: np.ndarray) -> float:
    neg = ds < 0
    return float(np.min(-s[neg] / ds[neg])) if np.any(neg) else np.inf


class _RealSDP:
    """Real symmetric standard form with dense coefficient stacks."""

    def __init__(self, a_blocks, a_lin, c_blocks, c_lin, b):
        self.a_blocks = a_blocks
        self.a_lin = a_lin
        self.c_blocks = c_blocks
        self.c_lin = c_lin
        self.b = b
        self.m = b.size

    def apply(self, xs, s) -> np.ndarray:
        out = self.a_lin @ s
        for a, x in zip(self.a_blocks, xs):
            out = out + np.einsum("mij,ij->m", a, x)
        return out

    def adjoint(self, y):
        return [np.einsum("m,mij->ij", y, a) for a in self.a_blocks], self.a_lin.T @ y

    def objective(self, xs, s) -> float:
        return float(sum(np.sum(c * x) for c, x in zip(self.c_blocks, xs)) + self.c_lin @ s)


def _independent_rows(a_flat: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Indices of a maximal independent row set and whether dropped rows are consistent."""
    if a_flat.shape[0] == 0:
        return np.arange(0), True
    _, r, piv = qr(a_flat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(a_flat.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0) * 10
    rank = int(np.sum(diag > tol))
    keep = np.sort(piv[:rank])
    if rank == a_flat.shape[0]:
        return keep, True
    coef, *_ = np.linalg.lstsq(a_flat[keep].T, a_flat.T, rcond=None)
    consistent = np.allclose(coef.T @ b[keep], b, atol=1e-9 * (1 + np.abs(b).max()))
    return keep, consistent


def _ipm(sdp: _RealSDP, max_iter: int, big_m: float):
    dims = [c.shape[0] for c in sdp.c_blocks]
    n_lin = sdp.c_lin.size
    scale = 1.0 + max([np.abs(c).max(initial=0.0) for c in sdp.c_blocks] + [np.abs(sdp.c_lin).max(initial=0.0)])
    zeta = max(10.0, np.sqrt(max(dims + [1])), scale)
    xs = [np.eye(d) for d in dims]
    s = np.ones(n_lin)
    r = sdp.b - sdp.apply(xs, s)
    aux = np.linalg.norm(r) > 1e-12 * (1 + np.linalg.norm(sdp.b))
    if aux:
        sdp.a_lin = np.column_stack([sdp.a_lin, r])
        sdp.c_lin = np.append(sdp.c_lin, big_m)
        s = np.append(s, 1.0)
    zs = [zeta * np.eye(d) for d in dims]
    z = np.full(s.size, zeta)
    y = np.zeros(sdp.m)
    n_cone = sum(dims) + s.size
    b_norm = 1.0 + np.linalg.norm(sdp.b)
    c_norm = 1.0 + np.sqrt(sum(np.sum(c**2) for c in sdp.c_blocks) + np.sum(sdp.c_lin**2))
    a_flat = [a.reshape(sdp.m, -1) for a in sdp.a_blocks]

    best = None
    for it in range(max_iter):
        rp = sdp.b - sdp.apply(xs, s)
        aty, aty_lin = sdp.adjoint(y)
        rd = [c - t - zk for c, t, zk in zip(sdp.c_blocks, aty, zs)]
        rd_lin = sdp.c_lin - aty_lin - z
        pobj = sdp.objective(xs, s)
        dobj = float(sdp.b @ y)
        mu = (sum(np.sum(x * zk) for x, zk in zip(xs, zs)) + s @ z) / n_cone
        pinf = np.linalg.norm(rp) / b_norm
        dinf = np.sqrt(sum(np.sum(t**2) for t in rd) + np.sum(rd_lin**2)) / c_norm
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        merit = max(pinf, dinf, rel_gap)
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in xs], s.copy(), y.copy(), pinf, dinf, rel_gap, it)
        logging.debug(f"sdp it={it} pobj={pobj:.9g} dobj={dobj:.9g} pinf={pinf:.1e} dinf={dinf:.1e} gap={rel_gap:.1e}")
        if pinf <= FEAS_TOL and dinf <= FEAS_TOL and rel_gap <= GAP_TOL:
            break

        try:
            zinv = [np.linalg.inv(zk) for zk in zs]
        except np.linalg.LinAlgError:
            break
        schur = (sdp.a_lin * (s / z)) @ sdp.a_lin.T
        for a, af, zi, x in zip(sdp.a_blocks, a_flat, zinv, xs):
            g = np.matmul(np.matmul(zi, a), x).reshape(sdp.m, -1)
            schur += af @ g.T
        schur = _sym(schur)
        try:
            factor = cho_factor(schur)
            solve = lambda rhs: cho_solve(factor, rhs)  # noqa: E731
        except LinAlgError:
            solve = lambda rhs: np.linalg.lstsq(schur, rhs, rcond=None)[0]  # noqa: E731

        def direction(targets, target_lin):
            """Newton step for complementarity targets T (dX = T − sym(Z⁻¹ dZ X))."""
            rhs = rp - sdp.a_lin @ (target_lin - (s / z) * rd_lin)
            for a, t, zi, rdk, x in zip(sdp.a_blocks, targets, zinv, rd, xs):
                rhs -= np.einsum("mij,ij->m", a, t - zi @ rdk @ x)
            dy = solve(rhs)
            aty_d, aty_d_lin = sdp.adjoint(dy)
            dzs = [rdk - t for rdk, t in zip(rd, aty_d)]
            dz = rd_lin - aty_d_lin
            dxs = [t - _sym(zi @ dzk @ x) for t, zi, dzk, x in zip(targets, zinv, dzs, xs)]
            ds = target_lin - (s / z) * dz
            return dxs, ds, dy, dzs, dz

        def steps(dxs, ds, dzs, dz):
            ap = min([_max_step(x, d) for x, d in zip(xs, dxs)] + [_max_step_lin(s, ds)])
            ad = min([_max_step(zk, d) for zk, d in zip(zs, dzs)] + [_max_step_lin(z, dz)])
            return min(1.0, STEP_FACTOR * ap), min(1.0, STEP_FACTOR * ad)

        dxa, dsa, _, dza, dz_a = direction([-x for x in xs], -s)
        ap, ad = steps(dxa, dsa, dza, dz_a)
        mu_aff = (
            sum(np.sum((x + ap * dx) * (zk + ad * dzk)) for x, dx, zk, dzk in zip(xs, dxa, zs, dza))
            + (s + ap * dsa) @ (z + ad * dz_a)
        ) / n_cone
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        targets = [
            _sym(sigma * mu * zi - x - zi @ dzk @ dx) for zi, x, dzk, dx in zip(zinv, xs, dza, dxa)
        ]
        target_lin = sigma * mu / z - s - dz_a * dsa / z
        dxs, ds, dy, dzs, dz = direction(targets, target_lin)
        ap, ad = steps(dxs, ds, dzs, dz)
        if ap < 1e-12 and ad < 1e-12:
            logging.debug("sdp: step length collapsed")
            break
        xs = [_sym(x + ap * d) for x, d in zip(xs, dxs)]
        s = s + ap * ds
        y = y + ad * dy
        zs = [_sym(zk + ad * d) for zk, d in zip(zs, dzs)]
        z = z + ad * dz
    else:
        it = max_iter

    merit, xs_b, s_b, y_b, pinf, dinf, rel_gap, it_b = best
    return xs_b, s_b, y_b, pinf, dinf, rel_gap, it, aux


def solve_sdp(prob: SDPProblem, max_iter: int = 200, big_m: float = None) -> SDPSolution:
    """
    Solves an ``SDPProblem``.

    Infeasibility is declared when the big-M auxiliary scalar (used to make
    the identity start feasible) stays above 1e-6 at convergence.

    Raises:
        NumericalFailure: when the method neither converges nor reaches the
            accepted residuals within ``max_iter`` iterations; ``best`` holds
            the best iterate.
    """
    if max_iter < 1:
        raise UsageError(f"max_iter must be at least 1 (got {max_iter})")
    names = list(prob.block_dims)
    if prob.total_dim > prob.max_dim:
        raise ResourceError(f"SDP total PSD dimension {prob.total_dim} exceeds cap {prob.max_dim}")
    chunks = prob.chunks
    b = np.concatenate([c.rhs for c in chunks]) if chunks else np.zeros(0)
    m = b.size
    coef = {n: np.zeros((m, d, d), dtype=complex) for n, d in prob.block_dims.items()}
    lin = np.zeros((m, len(prob.scalar_names)))
    row = 0
    for chunk in chunks:
        r = chunk.rhs.size
        for n, a in chunk.blocks.items():
            coef[n][row : row + r] += a
        for n, a in chunk.scalars.items():
            lin[row : row + r, prob.scalar_names.index(n)] += a
        row += r
    c_blocks = {n: prob.objective_blocks.get(n, np.zeros((d, d), dtype=complex)) for n, d in prob.block_dims.items()}
    c_lin = np.array([prob.objective_scalars.get(n, 0.0) for n in prob.scalar_names])

    complex_mode = any(np.abs(coef[n].imag).max(initial=0.0) > 1e-15 for n in names) or any(
        np.abs(c.imag).max(initial=0.0) > 1e-15 for c in c_blocks.values()
    )
    if complex_mode:
        a_blocks = [_realify(coef[n]) / 2 for n in names]
        cb = [_realify(c_blocks[n]) / 2 for n in names]
    else:
        a_blocks = [coef[n].real for n in names]
        cb = [c_blocks[n].real for n in names]
    a_blocks = [(a + np.swapaxes(a, 1, 2)) / 2 for a in a_blocks]
    cb = [_sym(c) for c in cb]

    a_flat = np.hstack([a.reshape(m, -1) for a in a_blocks] + [lin]) if m else np.zeros((0, 0))
    zero_rows = np.all(np.abs(a_flat) <= 1e-14, axis=1) if m else np.zeros(0, bool)
    if np.any(np.abs(b[zero_rows]) > 1e-12):
        logging.info("sdp: constraint 0 = b ≠ 0, problem infeasible")
        return SDPSolution(status="infeasible", value=np.inf, dual_value=np.inf)
    keep, consistent = _independent_rows(a_flat[~zero_rows], b[~zero_rows])
    if not consistent:
        logging.info("sdp: dependent constraints are inconsistent, problem infeasible")
        return SDPSolution(status="infeasible", value=np.inf, dual_value=np.inf)
    rows = np.flatnonzero(~zero_rows)[keep]
    sdp = _RealSDP([a[rows] for a in a_blocks], lin[rows], cb, c_lin.copy(), b[rows])
    if big_m is None:
        big_m = 1e5 * (1.0 + max([np.abs(c).max(initial=0.0) for c in cb] + [np.abs(c_lin).max(initial=0.0)]))

    xs, s, y, pinf, dinf, rel_gap, iterations, aux = _ipm(sdp, max_iter, big_m)
    aux_value = float(s[-1]) if aux else 0.0
    s_orig = s[: c_lin.size]
    value = float(sum(np.sum(c * x) for c, x in zip(cb, xs)) + c_lin @ s_orig)
    dual_value = float(sdp.b @ y)
    blocks = {n: (_unrealify(x) if complex_mode else _sym(x)) for n, x in zip(names, xs)}
    scalars = {n: float(v) for n, v in zip(prob.scalar_names, s_orig)}
    converged = pinf <= ACCEPT_FEAS and dinf <= ACCEPT_FEAS and rel_gap <= ACCEPT_GAP
    if aux and aux_value > INFEASIBLE_AUX and (converged or iterations >= max_iter):
        logging.info(f"sdp: auxiliary variable {aux_value:.2e} > {INFEASIBLE_AUX}, infeasible")
        return SDPSolution(
            status="infeasible", value=np.inf, dual_value=dual_value, blocks=blocks, scalars=scalars,
            duals=y, primal_infeasibility=pinf, dual_infeasibility=dinf, relative_gap=rel_gap, iterations=iterations,
        )
    solution = SDPSolution(
        status="optimal",
        value=value,
        dual_value=dual_value,
        blocks=blocks,
        scalars=scalars,
        duals=y,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        relative_gap=rel_gap,
        iterations=iterations,
    )
    if not converged:
        logging.error(f"sdp: no convergence (pinf={pinf:.1e}, dinf={dinf:.1e}, gap={rel_gap:.1e})")
        raise NumericalFailure("SDP solver did not converge", best=solution)
    logging.debug(f"sdp: optimal value {value:.10g} after {iterations} iterations")
    return solution

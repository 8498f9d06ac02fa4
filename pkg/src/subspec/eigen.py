"""First eigenpair of the fractional p-sub-Laplacian by Rayleigh-quotient
minimization on the unit L^p sphere, with a dense linear-algebra oracle at
p = 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, NumericError, SolverError
from .grid import GridDomain
from .kernel import FracParams, KernelTable
from .ops import Field, energy_gradient, gagliardo_energy, lp_norm_pow


@dataclass
class SolverOpts:
    tol: float = 1e-9
    max_iter: int = 50_000
    armijo_c: float = 1e-4
    armijo_factor: float = 0.5
    polish_steps: int = 100

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigError(f"solver tolerance must be positive, got {self.tol}")


@dataclass
class EigenResult:
    lambda1: float
    phi1: Field
    iterations: int
    residual: float
    trace: np.ndarray = field(repr=False)
    lambda1_raw: float = None


def rayleigh(u, K: KernelTable, p: float | None = None) -> float:
    """Seminorm-to-L^p ratio; scale invariant, minimized by the first
    eigenfunction."""
    p = K.fp.p if p is None else p
    vals = u.values if isinstance(u, Field) else np.asarray(u, float)
    npow = lp_norm_pow(vals, p, K.grid)
    if npow == 0.0:
        raise ConfigError("Rayleigh quotient of the zero field")
    return gagliardo_energy(vals, K, p) / npow


def bump_field(grid: GridDomain) -> Field:
    """Positive product of coordinate hat functions; the default solver
    initialization."""
    lo = grid.nodes.min(axis=0)
    hi = grid.nodes.max(axis=0)
    mid = 0.5 * (lo + hi)
    half = np.where(hi > lo, 0.5 * (hi - lo), 1.0)
    hats = np.clip(1.0 - np.abs(grid.nodes - mid) / (half + grid.spacing), 1e-3, None)
    return Field(np.prod(hats, axis=1), grid)


def _normalize_p(vals: np.ndarray, p: float, grid: GridDomain) -> np.ndarray:
    npow = lp_norm_pow(vals, p, grid)
    if npow == 0.0:
        raise NumericError("iterate collapsed to zero")
    return vals / npow ** (1.0 / p)


def _descend(vals, K, p, tol, max_iter, c, factor, trace):
    """Projected gradient descent of the Rayleigh quotient on the L^p
    sphere; returns (vals, iterations, residual)."""
    grid = K.grid
    cell = grid.cell_measure
    vals = _normalize_p(vals, p, grid)
    lam = gagliardo_energy(vals, K, p)  # = Rayleigh on the unit sphere
    res = np.inf
    prev_vals = prev_g = None
    for it in range(max_iter):
        grad_e = energy_gradient(vals, K, p)
        grad_n = p * cell * np.sign(vals) * np.abs(vals) ** (p - 1.0)
        g = grad_e - lam * grad_n
        res = float(np.linalg.norm(g))
        trace.append(lam)
        if not np.isfinite(res):
            raise NumericError("NaN in the eigen line search")
        if res < tol:
            return vals, it, res
        gsq = res * res
        # spectral (Barzilai-Borwein) initial trial step, Armijo safeguarded
        alpha = 1.0
        if prev_g is not None:
            dv = vals - prev_vals
            dg = g - prev_g
            denom = float(dv @ dg)
            if denom > 0:
                alpha = min(max(float(dv @ dv) / denom, 1e-12), 1e8)
        prev_vals, prev_g = vals, g
        accepted = False
        for _ in range(80):
            trial = _normalize_p(vals - alpha * g, p, grid)
            lam_t = gagliardo_energy(trial, K, p)
            if lam_t <= lam - c * alpha * gsq:
                vals, lam = trial, lam_t
                accepted = True
                break
            alpha *= factor
        if not accepted:
            # line search exhausted: gradient is at rounding level
            return vals, it, res
    return vals, max_iter, res


def _hessian_energy(vals: np.ndarray, K: KernelTable, p: float) -> np.ndarray:
    """Dense Hessian of gagliardo_energy; |diff|^(p-2) is floored so the
    p < 2 branch stays finite at coincident values."""
    du = vals[:, None] - vals[None, :]
    if p == 2.0:
        pw = np.ones_like(du)
    else:
        pw = (np.abs(du) + 1e-300) ** (p - 2.0) if p < 2.0 else np.abs(du) ** (p - 2.0)
    off = -2.0 * p * (p - 1.0) * K.w * pw
    H = off - np.diag(off.sum(axis=1))
    up = np.ones_like(vals) if p == 2.0 else (np.abs(vals) + 1e-300) ** (p - 2.0)
    H += np.diag(p * (p - 1.0) * K.b * up)
    return H


def _newton_refine(vals, K, p, tol, trace, max_newton=50):
    """Newton iterations on the KKT system of the sphere-constrained
    minimization; pushes the Lagrangian residual to the requested floor."""
    grid = K.grid
    cell = grid.cell_measure
    n = vals.shape[0]
    res = np.inf
    for _ in range(max_newton):
        vals = _normalize_p(vals, p, grid)
        lam = gagliardo_energy(vals, K, p)
        grad_n = p * cell * np.sign(vals) * np.abs(vals) ** (p - 1.0)
        g = energy_gradient(vals, K, p) - lam * grad_n
        res = float(np.linalg.norm(g))
        trace.append(lam)
        if res < tol:
            return vals, res
        Hn = p * (p - 1.0) * cell * np.diag((np.abs(vals) + 1e-300) ** (p - 2.0))
        H = _hessian_energy(vals, K, p) - lam * Hn
        kkt = np.zeros((n + 1, n + 1))
        kkt[:n, :n] = H
        kkt[:n, n] = grad_n
        kkt[n, :n] = grad_n
        rhs = np.concatenate([-g, [0.0]])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return vals, res
        step = sol[:n]
        # damped: halve until the residual actually drops
        alpha = 1.0
        for _ in range(40):
            trial = _normalize_p(vals + alpha * step, p, grid)
            lam_t = gagliardo_energy(trial, K, p)
            gn_t = p * cell * np.sign(trial) * np.abs(trial) ** (p - 1.0)
            g_t = energy_gradient(trial, K, p) - lam_t * gn_t
            if np.linalg.norm(g_t) < res:
                vals = trial
                break
            alpha *= 0.5
        else:
            return vals, res
    return vals, res


def minimize_rayleigh(K: KernelTable, p: float | None = None, init=None,
                      opts: SolverOpts | None = None) -> EigenResult:
    """Minimize the Rayleigh quotient; the returned eigenfunction is the
    absolute value of the converged iterate, re-polished by a fixed number
    of extra descent steps.

    Two phases: projected descent with a spectral step and Armijo
    backtracking for the global approach, then Newton refinement of the
    constrained stationarity system down to the residual tolerance.
    """
    p = K.fp.p if p is None else p
    opts = opts or SolverOpts()
    grid = K.grid
    if init is None:
        init = bump_field(grid)
    vals = (init.values if isinstance(init, Field) else np.asarray(init, float)).copy()
    trace: list[float] = []
    vals, it, res = _descend(vals, K, p, max(opts.tol, 1e-6), opts.max_iter,
                             opts.armijo_c, opts.armijo_factor, trace)
    if res >= opts.tol:
        vals, res = _newton_refine(vals, K, p, opts.tol, trace)
    if res >= opts.tol:
        raise SolverError(
            f"Rayleigh minimization did not reach tol={opts.tol} in "
            f"{opts.max_iter} iterations (residual {res:.3e})",
            trace=np.asarray(trace))
    lam_raw = trace[-1]
    # sign fix and polish
    vals = np.abs(vals)
    if opts.polish_steps:
        vals, _, res = _descend(vals, K, p, 0.0, opts.polish_steps,
                                opts.armijo_c, opts.armijo_factor, trace)
        if res >= opts.tol:
            vals, res = _newton_refine(vals, K, p, opts.tol, trace)
    phi = Field(_normalize_p(vals, p, grid), grid)
    lam = gagliardo_energy(phi.values, K, p)
    return EigenResult(lambda1=lam, phi1=phi, iterations=it + opts.polish_steps,
                       residual=res, trace=np.asarray(trace), lambda1_raw=lam_raw)


def p2_matrices(K: KernelTable):
    """Stiffness/mass pair (A, M) with u^T A u = gagliardo_energy(u, p=2)
    and M the diagonal cell-measure mass matrix."""
    w = K.w
    A = -2.0 * w + np.diag(2.0 * w.sum(axis=1) + K.b)
    asym = np.abs(A - A.T).max()
    scale = max(np.abs(A).max(), 1.0)
    if asym > 1e-12 * scale:
        raise NumericError(f"assembled p=2 matrix asymmetric by {asym:.3e}")
    M = K.grid.cell_measure * np.eye(K.n)
    return A, M


def p2_spectrum(K: KernelTable, k: int = 2):
    """Smallest k generalized eigenpairs of (A, M) by dense symmetric solve."""
    A, M = p2_matrices(K)
    vals, vecs = scipy.linalg.eigh(A, M)
    return vals[:k], vecs[:, :k]


def p2_oracle(K: KernelTable) -> float:
    """Smallest generalized eigenvalue; the independent check of the
    nonlinear minimizer at p = 2."""
    vals, _ = p2_spectrum(K, k=1)
    return float(vals[0])


def lambda1_lower_bound(grid: GridDomain, fp: FracParams,
                        sobolev_const: float) -> float:
    """Diagnostic lower bound C^(-p) |Omega|^(-ps/Q) from the Sobolev
    embedding, with an empirically measured constant."""
    return sobolev_const ** (-fp.p) * grid.measure() ** (-fp.ps / fp.Q)

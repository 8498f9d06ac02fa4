"""Batch verification of structural properties on configured instances.

Each check solves or re-solves as needed, measures the quantities the
property constrains, and reports pass/fail with the exact tolerance used.
Empirical constants (embedding constants, lower-bound constants) are
reported as measured values, never asserted against theoretical ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import (SolverOpts, bump_field, minimize_rayleigh, p2_oracle,
                    p2_spectrum)
from .errors import ConfigError
from .grid import GridDomain, dilate_grid
from .kernel import FracParams, KernelTable, TruncationPolicy, assemble
from .ops import Field, energy_gradient, gagliardo_energy


@dataclass
class CheckReport:
    name: str
    instance: dict
    status: str                   # "pass" | "fail"
    measured: dict
    tolerance: float | None
    statement: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "instance": self.instance,
            "status": self.status,
            "measured": {k: _jsonable(v) for k, v in self.measured.items()},
            "tolerance": self.tolerance,
            "statement": self.statement,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def _descriptor(K: KernelTable) -> dict:
    return {
        "group": K.grid.group.to_json(),
        "domain": K.grid.spec.to_json(),
        "n_nodes": K.n,
        "s": K.fp.s,
        "p": K.fp.p,
    }


def check_positivity_simplicity(K: KernelTable, restarts: int = 5,
                                seed: int = 0,
                                opts: SolverOpts | None = None) -> CheckReport:
    """First eigenfunction strictly positive at every node; restarts agree
    up to normalization."""
    rng = np.random.default_rng(seed)
    results = [minimize_rayleigh(K, opts=opts)]
    for _ in range(restarts - 1):
        init = Field(rng.standard_normal(K.n), K.grid)
        results.append(minimize_rayleigh(K, init=init, opts=opts))
    min_val = min(float(r.phi1.values.min()) for r in results)
    ref = results[0].phi1.values
    cos_min = 1.0
    for r in results[1:]:
        v = r.phi1.values
        cos = float(abs(ref @ v) / (np.linalg.norm(ref) * np.linalg.norm(v)))
        cos_min = min(cos_min, cos)
    ok = min_val > 0.0 and cos_min > 1.0 - 1e-6
    return CheckReport(
        "positivity_simplicity", _descriptor(K),
        "pass" if ok else "fail",
        {"min_node_value": min_val, "min_cosine": cos_min,
         "lambda1": results[0].lambda1, "restarts": restarts},
        1e-6,
        "first eigenfunction strictly positive; unique up to scaling")


def check_scaling(grid: GridDomain, fp: FracParams, r: float,
                  policy: TruncationPolicy | None = None,
                  tol: float = 1e-10) -> CheckReport:
    """lambda1(D_r Omega) * r^(ps) equals lambda1(Omega) exactly on
    dilation-matched grids (p = 2, oracle route)."""
    K = assemble(grid, fp, policy)
    Kr = assemble(dilate_grid(grid, r), fp, policy)
    lam = p2_oracle(K)
    lam_r = p2_oracle(Kr)
    err = abs(lam_r * r**fp.ps - lam) / lam
    return CheckReport(
        "dilation_scaling", {**_descriptor(K), "r": r},
        "pass" if err < tol else "fail",
        {"lambda1": lam, "lambda1_dilated": lam_r, "relative_error": err},
        tol,
        "eigenvalue scales by r^(-ps) under the group dilation")


def check_sign_change(K: KernelTable, tol: float = 0.0) -> CheckReport:
    """Second eigenvector (p = 2 spectrum) takes both signs; reports the
    nodal-set measures and the implied empirical lower-bound constant."""
    if K.fp.p != 2.0:
        raise ConfigError("sign-change check needs the p=2 oracle spectrum")
    vals, vecs = p2_spectrum(K, k=2)
    v2 = vecs[:, 1]
    cell = K.grid.cell_measure
    pos = float(np.sum(v2 > 0) * cell)
    neg = float(np.sum(v2 < 0) * cell)
    nu2 = float(vals[1])
    c_emp = None
    if pos > 0 and neg > 0:
        c_emp = nu2 * min(pos, neg) ** (K.fp.ps / K.fp.Q)
    ok = pos > tol and neg > tol
    return CheckReport(
        "sign_change", _descriptor(K),
        "pass" if ok else "fail",
        {"nu2": nu2, "nodal_positive_measure": pos,
         "nodal_negative_measure": neg, "empirical_constant": c_emp},
        tol,
        "second eigenfunction is sign-changing with nonempty nodal sets")


def estimate_embedding_constant(K: KernelTable, alpha: float,
                                restarts: int = 32, seed: int = 0,
                                iters: int = 2000, tol: float = 1e-10) -> float:
    """Empirical S_alpha = max of ||u||_alpha^alpha over the unit seminorm
    sphere, by projected ascent with random restarts.  A lower bound on the
    discrete supremum; reported as 'empirical'."""
    fp = K.fp
    if not (0.0 < alpha <= fp.p_star):
        raise ConfigError(f"embedding exponent must lie in (0, p_star], got {alpha}")
    grid = K.grid
    cell = grid.cell_measure
    p = fp.p
    rng = np.random.default_rng(seed)
    best = 0.0
    for trial in range(restarts):
        u = bump_field(grid).values if trial == 0 else rng.standard_normal(K.n)
        e = gagliardo_energy(u, K, p)
        u = u / e ** (1.0 / p)
        ratio = cell * np.sum(np.abs(u) ** alpha)
        for _ in range(iters):
            gT = alpha * cell * np.sign(u) * np.abs(u) ** (alpha - 1.0)
            gE = energy_gradient(u, K, p)
            g = gT - (alpha * ratio / p) * gE
            gn = float(np.linalg.norm(g))
            if gn < tol * max(ratio, 1.0):
                break
            step = 1.0
            improved = False
            for _ in range(60):
                v = u + step * g
                ev = gagliardo_energy(v, K, p)
                if ev > 0:
                    v = v / ev ** (1.0 / p)
                    rv = cell * np.sum(np.abs(v) ** alpha)
                    if rv >= ratio + 1e-4 * step * gn * gn:
                        u, ratio = v, rv
                        improved = True
                        break
                step *= 0.5
            if not improved:
                break
        best = max(best, float(ratio))
    return best


def check_lower_bound(K: KernelTable, lambda1: float,
                      restarts: int = 8, seed: int = 0) -> CheckReport:
    """Volume-based lower bound on lambda1 with the empirically measured
    critical-embedding constant; diagnostic companion of the solve."""
    fp = K.fp
    s_crit = estimate_embedding_constant(K, fp.p_star, restarts=restarts, seed=seed)
    sob = s_crit ** (1.0 / fp.p_star)
    bound = sob ** (-fp.p) * K.grid.measure() ** (-fp.ps / fp.Q)
    ok = lambda1 >= bound
    return CheckReport(
        "lambda1_lower_bound", _descriptor(K),
        "pass" if ok else "fail",
        {"lambda1": lambda1, "bound": bound, "sobolev_constant": sob},
        None,
        "first eigenvalue dominates the volume-based lower bound")


def check_comparison(solve_fn, factor: float = 1.2,
                     tol: float = 1e-8) -> CheckReport:
    """Scaling the singular weight up by `factor` must raise the solution
    nodewise.  solve_fn(scale) re-solves the problem with f -> scale*f."""
    u = solve_fn(1.0)
    v = solve_fn(factor)
    a, b = (u, v) if factor >= 1.0 else (v, u)
    worst = float(np.min(b.values - a.values))
    ok = worst > -tol
    return CheckReport(
        "comparison_principle", {"factor": factor},
        "pass" if ok else "fail",
        {"min_difference": worst,
         "sup_u": float(u.values.max()), "sup_v": float(v.values.max())},
        tol,
        "larger singular weight yields a nodewise larger solution")


def check_linfty_stability(solve_at_h, h_list, ratio_tol: float = 1.5) -> CheckReport:
    """Sup norms of the small solution stay bounded under refinement
    (empirical boundedness proxy).  solve_at_h(h) returns the solution."""
    sups = [float(solve_at_h(h).values.max()) for h in h_list]
    ratio = max(sups) / min(sups)
    ok = ratio < ratio_tol
    return CheckReport(
        "linfty_stability", {"h_list": list(h_list)},
        "pass" if ok else "fail",
        {"sup_norms": sups, "ratio": ratio},
        ratio_tol,
        "sup norms stable across grid refinement")


def check_eigen_refinement(lambda_at_h, h_list, rel_tol: float = 0.05) -> CheckReport:
    """First eigenvalue Cauchy within rel_tol between successive spacings."""
    lams = [float(lambda_at_h(h)) for h in h_list]
    worst = max(abs(b - a) / abs(b) for a, b in zip(lams, lams[1:]))
    ok = worst < rel_tol
    return CheckReport(
        "eigen_refinement", {"h_list": list(h_list)},
        "pass" if ok else "fail",
        {"lambda1_by_h": lams, "max_relative_change": worst},
        rel_tol,
        "first eigenvalue stabilizes under grid refinement")

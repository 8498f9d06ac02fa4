"""Two nonnegative solutions of the singular problem by the fibering method.

The energy along a ray t -> I(t u) has, for small enough lambda, exactly two
critical points t1 < t2; minimizing the reduced energy over directions on
each side of the split produces the two solution branches.  The singular
term u^(-delta) is regularized as (u + eps)^(-delta) inside gradients only,
with a geometric continuation on eps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BranchCollapseError, ConfigError, NumericError, SolverError
from .kernel import FracParams, KernelTable
from .ops import (Field, energy_gradient, gagliardo_energy, weak_action,
                  weight_integral)

NPLUS = "Nplus"
NMINUS = "Nminus"


@dataclass
class ProblemSpec:
    """Singular two-term right-hand side lambda*f*u^(-delta) + g*u^q."""

    fp: FracParams
    delta: float
    q: float
    f: np.ndarray
    g: np.ndarray
    lam: float
    eps_sing: float = 1e-8

    def __post_init__(self):
        p = self.fp.p
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"need delta in (0,1), got {self.delta}")
        if not (p < self.q + 1.0 < self.fp.p_star):
            raise ConfigError(
                f"need p < q+1 < p_star, got p={p}, q+1={self.q + 1.0}, "
                f"p_star={self.fp.p_star}")
        if self.lam <= 0:
            raise ConfigError(f"need lambda > 0, got {self.lam}")
        if self.eps_sing <= 0:
            raise ConfigError("eps_sing must be positive")
        self.f = np.asarray(self.f, float)
        self.g = np.asarray(self.g, float)
        if np.any(self.f <= 0) or np.any(self.g <= 0):
            raise ConfigError("weights f and g must be strictly positive")


@dataclass
class FiberScalars:
    """The three integrals a ray reduces the energy to."""

    A: float  # [u]^p
    F: float  # int f |u|^(1-delta)
    G: float  # int g |u|^(q+1)


@dataclass
class FiberReport:
    t_max: float
    m_max: float
    lam_F: float
    roots: tuple | None
    ddphi_signs: tuple | None


@dataclass
class NehariResult:
    u_plus: Field
    u_minus: Field
    I_plus: float
    I_minus: float
    residuals: dict = field(default_factory=dict)


def fiber_scalars(u, ps: ProblemSpec, K: KernelTable) -> FiberScalars:
    vals = u.values if isinstance(u, Field) else np.asarray(u, float)
    grid = K.grid
    return FiberScalars(
        A=gagliardo_energy(vals, K, ps.fp.p),
        F=weight_integral(vals, ps.f, 1.0 - ps.delta, grid),
        G=weight_integral(vals, ps.g, ps.q + 1.0, grid),
    )


def energy_I(u, ps: ProblemSpec, K: KernelTable) -> float:
    """(1/p)[u]^p - lambda/(1-delta) int f|u|^(1-delta)
    - 1/(q+1) int g|u|^(q+1)."""
    sc = fiber_scalars(u, ps, K)
    return (sc.A / ps.fp.p - ps.lam * sc.F / (1.0 - ps.delta)
            - sc.G / (ps.q + 1.0))


def fiber_values(sc: FiberScalars, ps: ProblemSpec, t: float) -> dict:
    """phi, phi', phi'' of the ray energy at t from the three scalars."""
    if t <= 0:
        raise ConfigError(f"fiber parameter must be positive, got {t}")
    p, d, q, lam = ps.fp.p, ps.delta, ps.q, ps.lam
    phi = (t**p / p) * sc.A - lam * t ** (1.0 - d) / (1.0 - d) * sc.F \
        - t ** (q + 1.0) / (q + 1.0) * sc.G
    dphi = t ** (p - 1.0) * sc.A - lam * t ** (-d) * sc.F - t**q * sc.G
    ddphi = (p - 1.0) * t ** (p - 2.0) * sc.A \
        + d * lam * t ** (-d - 1.0) * sc.F - q * t ** (q - 1.0) * sc.G
    return {"phi": phi, "dphi": dphi, "ddphi": ddphi}


def fiber(u, ps: ProblemSpec, K: KernelTable, t: float) -> dict:
    return fiber_values(fiber_scalars(u, ps, K), ps, t)


def m_of_t(sc: FiberScalars, ps: ProblemSpec, t) -> float:
    """t^(p-1+delta) A - t^(q+delta) G; the root function whose crossings
    with lambda*F are the fiber critical points."""
    p, d, q = ps.fp.p, ps.delta, ps.q
    return t ** (p - 1.0 + d) * sc.A - t ** (q + d) * sc.G


def t_max_of(sc: FiberScalars, ps: ProblemSpec) -> float:
    p, d, q = ps.fp.p, ps.delta, ps.q
    return ((p - 1.0 + d) * sc.A / ((q + d) * sc.G)) ** (1.0 / (q + 1.0 - p))


def m_max_golden(sc: FiberScalars, ps: ProblemSpec) -> float:
    """Golden-section maximization of m; the tie-breaking oracle for the
    closed-form maximizer."""
    tm = t_max_of(sc, ps)
    res = minimize_scalar(lambda t: -m_of_t(sc, ps, t),
                          bracket=(tm / 4.0, tm, tm * 4.0), method="golden",
                          options={"xtol": 1e-12})
    return -res.fun


def fiber_critical(u, ps: ProblemSpec, K: KernelTable | None = None,
                   scalars: FiberScalars | None = None) -> FiberReport:
    """Maximizer of m, its value (by direct substitution), and when
    lambda*F < m_max the two crossings t1 < t_max < t2 with their
    second-derivative signs."""
    sc = scalars if scalars is not None else fiber_scalars(u, ps, K)
    if sc.G <= 0 or sc.A <= 0:
        raise ConfigError("fiber analysis needs positive energy and G integral")
    tm = t_max_of(sc, ps)
    m_max = m_of_t(sc, ps, tm)
    lam_f = ps.lam * sc.F
    if lam_f >= m_max:
        return FiberReport(tm, m_max, lam_f, None, None)

    def h(t):
        return m_of_t(sc, ps, t) - lam_f

    lo = tm * 0.5
    for _ in range(200):
        if h(lo) < 0:
            break
        lo *= 0.5
    else:
        raise NumericError(f"no lower bracket for the fiber root below t_max={tm}")
    hi = tm * 2.0
    for _ in range(200):
        if h(hi) < 0:
            break
        hi *= 2.0
    else:
        raise NumericError(f"no upper bracket for the fiber root above t_max={tm}")
    t1 = brentq(h, lo, tm, xtol=1e-15 * tm, rtol=8.9e-16, maxiter=200)
    t2 = brentq(h, tm, hi, xtol=1e-15 * tm, rtol=8.9e-16, maxiter=200)
    s1 = fiber_values(sc, ps, t1)["ddphi"]
    s2 = fiber_values(sc, ps, t2)["ddphi"]
    p, d, q = ps.fp.p, ps.delta, ps.q
    for t, s in ((t1, s1), (t2, s2)):
        scale = (p - 1.0) * t ** (p - 2.0) * sc.A + q * t ** (q - 1.0) * sc.G
        if abs(s) < 1e-10 * scale:
            raise NumericError(
                "fiber root sits on the degenerate boundary between branches; "
                "lambda is too large or the discretization too coarse")
    if not (s1 > 0 > s2):
        raise NumericError(
            f"unexpected second-derivative signs at the fiber roots: {s1}, {s2}")
    return FiberReport(tm, m_max, lam_f, (t1, t2), (np.sign(s1), np.sign(s2)))


def lambda_star(sample_dirs, ps: ProblemSpec, K: KernelTable,
                S_q1: float | None = None, S_1md: float | None = None) -> dict:
    """Largest lambda guaranteeing two fiber roots for the sampled
    directions (empirical), and the closed-form lower estimate when
    embedding constants are supplied."""
    if len(sample_dirs) == 0:
        raise ConfigError("lambda_star needs a nonempty direction sample")
    best = np.inf
    for u in sample_dirs:
        sc = fiber_scalars(u, ps, K)
        if sc.F <= 0 or sc.G <= 0:
            raise ConfigError("sample direction with vanishing F or G integral")
        best = min(best, m_of_t(sc, ps, t_max_of(sc, ps)) / sc.F)
    formula = None
    if S_q1 is not None and S_1md is not None:
        formula = threshold_formula(ps, S_q1, S_1md)
    return {"empirical": float(best), "formula": formula}


def min_threshold_direction(ps: ProblemSpec, K: KernelTable, init: Field,
                            max_iter: int = 2000, tol: float = 1e-8) -> Field:
    """Direction minimizing the two-root threshold m_max / F.

    The ratio has the closed form c * A^a / (G^b * F) with exponents set by
    (p, q, delta), so its log-gradient is explicit; minimized by projected
    descent on the seminorm sphere with a positivity floor.
    """
    p, d, q = ps.fp.p, ps.delta, ps.q
    a = (q + d) / (q + 1.0 - p)
    b = (p - 1.0 + d) / (q + 1.0 - p)
    grid = K.grid
    cell = grid.cell_measure

    def ratio(w):
        sc = fiber_scalars(w, ps, K)
        return m_of_t(sc, ps, t_max_of(sc, ps)) / sc.F

    w = np.maximum(np.asarray(init.values, float), 1e-12)
    w = _normalize_seminorm(w, K, p)
    R = ratio(w)
    for _ in range(max_iter):
        sc = fiber_scalars(w, ps, K)
        gA = energy_gradient(w, K, p)
        gF = (1.0 - d) * cell * ps.f * w ** (-d)
        gG = (q + 1.0) * cell * ps.g * w ** q
        gr = a * gA / sc.A - b * gG / sc.G - gF / sc.F
        gt = gr - (gr @ gA) / (gA @ gA) * gA
        res = float(np.linalg.norm(gt))
        if res < tol:
            break
        alpha, accepted = 1.0, False
        for _ in range(60):
            trial = _normalize_seminorm(np.maximum(w - alpha * gt, 1e-12), K, p)
            Rt = ratio(trial)
            if Rt < R - 1e-4 * alpha * res * res:
                w, R = trial, Rt
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
    return Field(w, grid)


def positivity_threshold(sc: FiberScalars, ps: ProblemSpec) -> float:
    """Largest lambda keeping the fiber maximum phi(t2) nonnegative along
    this direction.  Strictly below the two-root threshold m_max / F, since
    at the root threshold the fiber max equals phi(t_max) < 0."""
    p, d, q = ps.fp.p, ps.delta, ps.q
    lam_roots = m_of_t(sc, ps, t_max_of(sc, ps)) / sc.F

    def phi_at_t2(lam):
        trial = ProblemSpec(ps.fp, d, q, ps.f, ps.g, lam, ps.eps_sing)
        rep = fiber_critical(None, trial, scalars=sc)
        if rep.roots is None:
            return -1.0
        return fiber_values(sc, trial, rep.roots[1])["phi"]

    lo = 1e-12 * lam_roots
    if phi_at_t2(lo) <= 0:
        raise NumericError("fiber maximum nonpositive even for tiny lambda")
    hi = lam_roots * (1.0 - 1e-9)
    if phi_at_t2(hi) >= 0:
        return hi
    return brentq(phi_at_t2, lo, hi, rtol=1e-12, maxiter=200)


def threshold_formula(ps: ProblemSpec, S_q1: float, S_1md: float) -> float:
    """Closed-form two-root threshold in terms of the embedding constants
    S_(q+1) and S_(1-delta) and the sup norms of the weights."""
    p, d, q = ps.fp.p, ps.delta, ps.q
    e1 = (q + d) / (d + 1.0 - p)
    e2 = (p - 1.0 + d) / (q + 1.0 - p)
    return ((q + 2.0 - p) / (p - 1.0 + d)
            * ((p - 1.0 + d) / (q + d)) ** e1
            * S_q1 ** (-e2) * S_1md ** (-1.0)
            / (ps.f.max() * ps.g.max() ** e2))


@dataclass
class NehariOpts:
    tol: float = 1e-9
    tol_final: float = 1e-7
    max_inner: int = 2_000
    eps_start: float = 1e-2
    eps_factor: float = 0.1
    armijo_c: float = 1e-4
    armijo_factor: float = 0.5
    max_backtracks: int = 60


def _normalize_seminorm(vals: np.ndarray, K: KernelTable, p: float) -> np.ndarray:
    e = gagliardo_energy(vals, K, p)
    if e == 0.0:
        raise NumericError("direction collapsed to zero seminorm")
    return vals / e ** (1.0 / p)


def _grad_I(vals: np.ndarray, ps: ProblemSpec, K: KernelTable,
            eps: float) -> np.ndarray:
    """Gradient of the energy with the singular term regularized by eps."""
    p = ps.fp.p
    cell = K.grid.cell_measure
    return (energy_gradient(vals, K, p) / p
            - ps.lam * cell * ps.f * (vals + eps) ** (-ps.delta)
            - cell * ps.g * np.maximum(vals, 0.0) ** ps.q)


def _newton_polish(vals: np.ndarray, ps: ProblemSpec, K: KernelTable,
                   eps: float, max_newton: int = 40) -> np.ndarray:
    """Damped Newton on the regularized Euler-Lagrange system from a
    near-critical start; keeps the iterate nonnegative and returns the
    best (smallest-defect) point seen."""
    from .eigen import _hessian_energy

    p = ps.fp.p
    cell = K.grid.cell_measure
    best = vals
    best_res = float(np.linalg.norm(_grad_I(vals, ps, K, eps)))
    for _ in range(max_newton):
        g = _grad_I(vals, ps, K, eps)
        res = float(np.linalg.norm(g))
        if res < 1e-15 * max(best_res, 1.0):
            break
        jac = _hessian_energy(vals, K, p) / p
        diag = ps.delta * ps.lam * ps.f * (vals + eps) ** (-ps.delta - 1.0) \
            - ps.q * ps.g * np.maximum(vals, 0.0) ** (ps.q - 1.0)
        jac += np.diag(cell * diag)
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            break
        alpha, improved = 1.0, False
        for _ in range(40):
            trial = np.maximum(vals + alpha * step, 0.0)
            r_t = float(np.linalg.norm(_grad_I(trial, ps, K, eps)))
            if r_t < res:
                vals, improved = trial, True
                if r_t < best_res:
                    best, best_res = trial, r_t
                break
            alpha *= 0.5
        if not improved:
            break
    return best


def _branch_t(report: FiberReport, branch: str) -> float:
    if report.roots is None:
        raise BranchCollapseError(
            f"no fiber roots: lambda*F={report.lam_F:.6g} >= "
            f"m_max={report.m_max:.6g}")
    return report.roots[0] if branch == NPLUS else report.roots[1]


def solve_branch(branch: str, ps: ProblemSpec, K: KernelTable, init: Field,
                 opts: NehariOpts | None = None) -> Field:
    """Minimize the reduced energy J(w) = I(t_b(w) w) over nonnegative
    directions on the seminorm sphere, t_b the branch's fiber root; returns
    t_b(w*) w*.

    The gradient of J uses the envelope property: the t-variation drops out
    at the root, leaving t_b * grad I(t_b w) projected tangentially.
    """
    if branch not in (NPLUS, NMINUS):
        raise ConfigError(f"unknown branch {branch!r}")
    opts = opts or NehariOpts()
    p = ps.fp.p
    vals = np.maximum(np.asarray(init.values, float), 0.0)
    if not np.any(vals > 0):
        raise ConfigError("branch solve needs a nonnegative nonzero init")
    vals = _normalize_seminorm(vals, K, p)

    eps_list = []
    eps = opts.eps_start
    while eps > ps.eps_sing:
        eps_list.append(eps)
        eps *= opts.eps_factor
    eps_list.append(ps.eps_sing)

    def reduced(v):
        sc = fiber_scalars(v, ps, K)
        rep = fiber_critical(None, ps, scalars=sc)
        t = _branch_t(rep, branch)
        return t, fiber_values(sc, ps, t)["phi"]

    t, J = reduced(vals)
    alpha0 = 1.0
    for eps in eps_list:
        for _ in range(opts.max_inner):
            u = t * vals
            gJ = t * _grad_I(u, ps, K, eps)
            nvec = energy_gradient(vals, K, p)
            gt = gJ - (gJ @ nvec) / (nvec @ nvec) * nvec
            # projected gradient for the nonnegativity bound
            r = np.where(vals > 0.0, gt, np.minimum(gt, 0.0))
            res = float(np.linalg.norm(r))
            if not np.isfinite(res):
                raise NumericError("NaN in the branch line search")
            # J and its gradient both scale like t^p along the branch, so
            # the stopping test is made scale invariant
            if res < opts.tol * (1.0 + abs(J)):
                break
            # warm-started trial step: grow the last accepted step
            alpha = min(alpha0 / opts.armijo_factor ** 2, 1e8)
            accepted = False
            for _ in range(opts.max_backtracks):
                trial = np.maximum(vals - alpha * gt, 0.0)
                if not np.any(trial > 0):
                    alpha *= opts.armijo_factor
                    continue
                trial = _normalize_seminorm(trial, K, p)
                try:
                    t_t, J_t = reduced(trial)
                except (BranchCollapseError, NumericError):
                    alpha *= opts.armijo_factor
                    continue
                if J_t <= J - opts.armijo_c * alpha * res * res:
                    vals, t, J = trial, t_t, J_t
                    alpha0 = alpha
                    accepted = True
                    break
                alpha *= opts.armijo_factor
            if not accepted:
                break  # stationary at rounding level for this stage
    # the continuation only needs to reach the Newton basin; the polish on
    # the full Euler-Lagrange system provides the terminal convergence
    u = _newton_polish(t * vals, ps, K, ps.eps_sing)
    # exact rescale back onto the constraint manifold
    w = _normalize_seminorm(u, K, p)
    rep = fiber_critical(None, ps, scalars=fiber_scalars(w, ps, K))
    u = _branch_t(rep, branch) * w
    scale = max(gagliardo_energy(u, K, p) ** ((p - 1.0) / p), 1.0)
    final = float(np.linalg.norm(_grad_I(u, ps, K, ps.eps_sing))) / scale
    if final > opts.tol_final:
        raise SolverError(
            f"{branch} solve left a relative Euler-Lagrange defect "
            f"{final:.3e} above tol_final={opts.tol_final}")
    return Field(u, K.grid)


def nehari_constraint_residual(u: Field, ps: ProblemSpec, K: KernelTable) -> float:
    """Relative size of [u]^p - lambda int f|u|^(1-delta) - int g|u|^(q+1)."""
    sc = fiber_scalars(u, ps, K)
    return abs(sc.A - ps.lam * sc.F - sc.G) / sc.A


def el_residual(u: Field, ps: ProblemSpec, K: KernelTable,
                test_set=None, eps_sing: float = 0.0,
                eps_report: float = 1e-6, seed: int = 0) -> float:
    """Worst normalized Euler-Lagrange defect over the test fields, which
    are supported where u exceeds eps_report so the singular term is
    evaluable.  eps_sing > 0 tests the regularized equation instead.  The
    defect is divided by the test-field seminorm and by the natural scale
    [u]^(p-1) of the weak form, making it invariant under rescaling u."""
    vals = u.values
    supp = vals > eps_report
    if not np.any(supp):
        raise ConfigError("field has no nodes above the reporting floor")
    if test_set is None:
        rng = np.random.default_rng(seed)
        test_set = [rng.standard_normal(vals.shape) * supp for _ in range(16)]
        test_set.append(vals * supp)
    p = ps.fp.p
    cell = K.grid.cell_measure
    sing = (vals + eps_sing) ** (-ps.delta) if eps_sing > 0 else \
        np.where(supp, np.maximum(vals, eps_report) ** (-ps.delta), 0.0)
    scale = max(gagliardo_energy(vals, K, p) ** ((p - 1.0) / p), 1.0)
    worst = 0.0
    for psi in test_set:
        psi = np.asarray(psi, float) * supp
        norm = gagliardo_energy(psi, K, p) ** (1.0 / p)
        if norm == 0.0:
            continue
        lhs = weak_action(vals, psi, K, p)
        rhs = ps.lam * cell * np.sum(ps.f * sing * psi) \
            + cell * np.sum(ps.g * np.maximum(vals, 0.0) ** ps.q * psi)
        worst = max(worst, abs(lhs - rhs) / (norm * scale))
    return worst


def solve_pair(ps: ProblemSpec, K: KernelTable, init: Field,
               opts: NehariOpts | None = None) -> NehariResult:
    """Both branches from the same init, with constraint and EL residuals."""
    u_plus = solve_branch(NPLUS, ps, K, init, opts)
    u_minus = solve_branch(NMINUS, ps, K, init, opts)
    res = {
        "nehari_plus": nehari_constraint_residual(u_plus, ps, K),
        "nehari_minus": nehari_constraint_residual(u_minus, ps, K),
        "el_plus": el_residual(u_plus, ps, K, eps_sing=ps.eps_sing),
        "el_minus": el_residual(u_minus, ps, K, eps_sing=ps.eps_sing),
    }
    return NehariResult(u_plus, u_minus,
                        energy_I(u_plus, ps, K), energy_I(u_minus, ps, K), res)

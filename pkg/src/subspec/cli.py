"""Command-line entry point: eigen | nehari | sweep | verify.

Configuration is a strict JSON file; results are schema-versioned JSON and
CSV.  Exit codes: 0 success, 1 failed verification check, 2 configuration
error, 3 solver failure, 4 branch collapse (lambda too large).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nehari as nh
from . import properties as props
from .eigen import SolverOpts, bump_field, minimize_rayleigh
from .errors import BranchCollapseError, ConfigError, NumericError, SolverError
from .grid import DomainSpec, GridDomain, build_grid
from .groups import GroupConfig
from .kernel import FracParams, KernelTable, TruncationPolicy, assemble
from .ops import BACKEND, Field

SCHEMA_VERSION = 1
NORMALIZATION = "C_{Q,s,p}=1, ordered-pair double sum, Korányi gauge"


@dataclass
class RunConfig:
    group: GroupConfig
    domain: DomainSpec
    h: float
    fp: FracParams
    policy: TruncationPolicy
    problem: dict | None
    solver: dict
    seed: int
    output_dir: str | None
    lambdas: list | None

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        try:
            group = GroupConfig.from_json(raw["group"])
            domain = DomainSpec.from_json(raw["domain"], group)
            h = float(raw["h"])
            fp = FracParams(float(raw["s"]), float(raw["p"]), group.Q)
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}")
        policy = TruncationPolicy.from_json(raw.get("truncation"))
        problem = raw.get("problem")
        if problem is not None and not isinstance(problem, dict):
            raise ConfigError("problem section must be an object")
        return cls(group, domain, h, fp, policy, problem,
                   raw.get("solver", {}), int(raw.get("seed", 0)),
                   raw.get("output_dir"), raw.get("lambdas"))

    def build(self) -> tuple[GridDomain, KernelTable]:
        grid = build_grid(self.domain, self.h)
        return grid, assemble(grid, self.fp, self.policy)

    def solver_opts(self) -> SolverOpts:
        return SolverOpts(tol=float(self.solver.get("tol", 1e-9)),
                          max_iter=int(self.solver.get("max_iter", 50_000)))


def _weight(spec, grid: GridDomain, name: str) -> np.ndarray:
    if spec is None:
        raise ConfigError(f"missing {name} weight in problem section")
    if isinstance(spec, str) and spec.startswith("const:"):
        return np.full(grid.n_nodes, float(spec.split(":", 1)[1]))
    if isinstance(spec, str):
        try:
            return Field.from_csv(spec, grid).values
        except OSError as exc:
            raise ConfigError(f"cannot read {name} weight file {spec}: {exc}")
    raise ConfigError(f"weight {name} must be 'const:<value>' or a CSV path")


def _sample_directions(grid: GridDomain, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    dirs = [bump_field(grid).values]
    for _ in range(count - 1):
        dirs.append(np.abs(rng.standard_normal(grid.n_nodes)) + 1e-3)
    return dirs


def _problem_spec(cfg: RunConfig, grid: GridDomain, K: KernelTable,
                  lam_override: float | None = None):
    """Returns (ProblemSpec, lambda_star_empirical, argmin direction).

    lambda_star_empirical is the two-root threshold minimized over sampled
    directions plus an explicitly optimized worst direction.  An 'auto'
    lambda is set to half the positivity threshold (the stricter level
    below which the high-energy branch keeps positive energy) at the
    optimized direction."""
    prob = cfg.problem
    if prob is None:
        raise ConfigError("this command needs a problem section in the config")
    fvals = _weight(prob.get("f"), grid, "f")
    gvals = _weight(prob.get("g"), grid, "g")
    delta = float(prob["delta"])
    q = float(prob["q"])
    eps_sing = float(prob.get("eps_sing", 1e-8))
    probe = nh.ProblemSpec(cfg.fp, delta, q, fvals, gvals, 1.0, eps_sing)
    wstar = nh.min_threshold_direction(probe, K, bump_field(grid))
    dirs = _sample_directions(grid, 64, cfg.seed) + [wstar.values]
    best, best_dir = np.inf, dirs[0]
    for d in dirs:
        sc = nh.fiber_scalars(d, probe, K)
        thr = nh.m_of_t(sc, probe, nh.t_max_of(sc, probe)) / sc.F
        if thr < best:
            best, best_dir = thr, d
    lam_cfg = prob.get("lambda", "auto") if lam_override is None else lam_override
    if lam_cfg == "auto":
        sc_star = nh.fiber_scalars(wstar, probe, K)
        lam = 0.5 * nh.positivity_threshold(sc_star, probe)
    else:
        lam = float(lam_cfg)
    ps = nh.ProblemSpec(cfg.fp, delta, q, fvals, gvals, lam, eps_sing)
    return ps, float(best), best_dir


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION,
               "normalization": NORMALIZATION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_eigen(cfg: RunConfig, outdir: Path) -> int:
    grid, K = cfg.build()
    opts = cfg.solver_opts()
    try:
        result = minimize_rayleigh(K, opts=opts)
    except SolverError as exc:
        if exc.trace is not None:
            np.savetxt(outdir / "trace.csv", np.asarray(exc.trace),
                       header="rayleigh", comments="")
        print(f"error: {exc}", file=sys.stderr)
        return 3
    result.phi1.to_csv(outdir / "phi1.csv")
    np.savetxt(outdir / "trace.csv", result.trace, header="rayleigh", comments="")
    _write_json(outdir / "eigen_result.json", {
        "lambda1": result.lambda1,
        "lambda1_raw": result.lambda1_raw,
        "residual": result.residual,
        "iterations": result.iterations,
        "n_nodes": grid.n_nodes,
        "phi1_csv_path": str(outdir / "phi1.csv"),
    })
    print(f"lambda1 = {result.lambda1:.12g} "
          f"({result.iterations} iterations, residual {result.residual:.3e})")
    return 0


def cmd_nehari(cfg: RunConfig, outdir: Path) -> int:
    grid, K = cfg.build()
    ps, lam_star, _ = _problem_spec(cfg, grid, K)
    init = bump_field(grid)
    report = nh.fiber_critical(init, ps, K)
    with open(outdir / "fiber_report.json", "w") as fh:
        json.dump({
            "t_max": report.t_max, "m_max": report.m_max,
            "lam_F": report.lam_F,
            "roots": list(report.roots) if report.roots else None,
            "ddphi_signs": list(report.ddphi_signs) if report.ddphi_signs else None,
        }, fh, indent=2)
    try:
        result = nh.solve_pair(ps, K, init)
    except BranchCollapseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (SolverError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    result.u_plus.to_csv(outdir / "u_plus.csv")
    result.u_minus.to_csv(outdir / "u_minus.csv")
    _write_json(outdir / "nehari_result.json", {
        "lambda": ps.lam,
        "lambda_star_empirical": lam_star,
        "lambda_margin": ps.lam / lam_star,
        "I_plus": result.I_plus,
        "I_minus": result.I_minus,
        "residuals": result.residuals,
        "sup_u_plus": float(result.u_plus.values.max()),
        "sup_u_minus": float(result.u_minus.values.max()),
        "u_plus_csv_path": str(outdir / "u_plus.csv"),
        "u_minus_csv_path": str(outdir / "u_minus.csv"),
    })
    print(f"I_plus = {result.I_plus:.6g}, I_minus = {result.I_minus:.6g} "
          f"(lambda = {ps.lam:.6g}, margin {ps.lam / lam_star:.3f})")
    return 0


def cmd_sweep(cfg: RunConfig, outdir: Path, lambdas) -> int:
    if not lambdas:
        raise ConfigError("sweep needs a nonempty lambda list")
    grid, K = cfg.build()
    rows = []
    for lam in lambdas:
        ps, _, probe_dir = _problem_spec(cfg, grid, K, lam_override=float(lam))
        rep = nh.fiber_critical(probe_dir, ps, K)
        two = rep.roots is not None
        ip = im = sup_p = sup_m = float("nan")
        if two:
            try:
                res = nh.solve_pair(ps, K, bump_field(grid))
                ip, im = res.I_plus, res.I_minus
                sup_p = float(res.u_plus.values.max())
                sup_m = float(res.u_minus.values.max())
            except (BranchCollapseError, SolverError, NumericError) as exc:
                print(f"lambda={lam}: {exc}", file=sys.stderr)
        rows.append((float(lam), int(two), ip, im, sup_p, sup_m))
        print(f"lambda={lam:.6g} two_roots={two}")
    header = "lambda,has_two_roots,I_plus,I_minus,sup_u_plus,sup_u_minus"
    np.savetxt(outdir / "sweep.csv", np.asarray(rows), delimiter=",",
               header=header, comments="")
    return 0


def cmd_verify(cfg: RunConfig, outdir: Path) -> int:
    grid, K = cfg.build()
    reports = []
    seed = cfg.seed
    reports.append(props.check_positivity_simplicity(K, seed=seed,
                                                     opts=cfg.solver_opts()))
    lam1 = reports[0].measured["lambda1"]
    for r in (2.0, 0.5):
        reports.append(props.check_scaling(grid, cfg.fp, r, cfg.policy))
    if cfg.fp.p == 2.0:
        reports.append(props.check_sign_change(K))
    reports.append(props.check_lower_bound(K, lam1, seed=seed))
    if cfg.problem is not None:
        ps, _, _ = _problem_spec(cfg, grid, K)

        def solve_scaled(factor):
            scaled = nh.ProblemSpec(ps.fp, ps.delta, ps.q, factor * ps.f,
                                    ps.g, ps.lam, ps.eps_sing)
            return nh.solve_branch(nh.NPLUS, scaled, K, bump_field(grid))

        reports.append(props.check_comparison(solve_scaled))

        def solve_at_h(h):
            g2 = build_grid(cfg.domain, h)
            K2 = assemble(g2, cfg.fp, cfg.policy)
            ps2, _, _ = _problem_spec(cfg, g2, K2, lam_override=ps.lam)
            return nh.solve_branch(nh.NPLUS, ps2, K2, bump_field(g2))

        def lam_at_h(h):
            g2 = build_grid(cfg.domain, h)
            from .eigen import p2_oracle
            K2 = assemble(g2, cfg.fp, cfg.policy)
            if cfg.fp.p == 2.0:
                return p2_oracle(K2)
            return minimize_rayleigh(K2, opts=cfg.solver_opts()).lambda1

        h_list = [2.0 * cfg.h, cfg.h]
        reports.append(props.check_linfty_stability(solve_at_h, h_list))
        reports.append(props.check_eigen_refinement(lam_at_h, h_list))
    payload = {"checks": [r.to_json() for r in reports]}
    _write_json(outdir / "verify_report.json", payload)
    width = max(len(r.name) for r in reports)
    for r in reports:
        print(f"{r.name:<{width}}  {r.status.upper():4}  {r.statement}")
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="subspec",
        description="Variational solver and verification suite for "
                    "fractional p-sub-Laplacian problems on stratified groups")
    parser.add_argument("command", choices=["eigen", "nehari", "sweep", "verify"])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker thread count (0 = auto)")
    parser.add_argument("--lambdas", default=None,
                        help="comma-separated lambda list for sweep")
    args = parser.parse_args(argv)

    if args.threads > 0:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))

    try:
        cfg = RunConfig.load(args.config)
        outdir = Path(args.out or os.environ.get("SUBSPEC_OUT")
                      or cfg.output_dir or ".")
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "eigen":
            return cmd_eigen(cfg, outdir)
        if args.command == "nehari":
            return cmd_nehari(cfg, outdir)
        if args.command == "sweep":
            lambdas = cfg.lambdas
            if args.lambdas:
                lambdas = [float(x) for x in args.lambdas.split(",")]
            return cmd_sweep(cfg, outdir, lambdas)
        return cmd_verify(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BranchCollapseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (SolverError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Discrete realization of the nonlocal Gagliardo energy on a grid.

The pair table carries w_ij = d(x_i,x_j)^{-(Q+ps)} * cell^2 for interior
node pairs; the complement weights b_i carry (twice) the kernel mass of
G \\ Omega seen from node i.  The complement integral is computed on graded
shells of lattice offsets around each node, truncated at R_t, with the
region beyond R_t added in closed form: the radial pushforward of the Haar
measure under a homogeneous gauge has exact density sigma_S * r^(Q-1) with
sigma_S = Q * |B(0,1)|, so the far field integrates to
sigma_S * R_t^(-ps) / (ps).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import groups
from .errors import ConfigError
from .grid import GridDomain
from .groups import GroupConfig


@dataclass(frozen=True)
class FracParams:
    """Differentiability order s, integrability p, homogeneous dimension Q."""

    s: float
    p: float
    Q: int

    def __post_init__(self):
        if not (0.0 < self.s < 1.0 < self.p):
            raise ConfigError(f"need 0 < s < 1 < p, got s={self.s}, p={self.p}")
        if self.Q <= self.p * self.s:
            raise ConfigError(f"need Q > p*s, got Q={self.Q}, p*s={self.p * self.s}")

    @property
    def ps(self) -> float:
        return self.p * self.s

    @property
    def Q_plus_ps(self) -> float:
        return self.Q + self.ps

    @property
    def p_star(self) -> float:
        """Critical exponent Q*p / (Q - s*p)."""
        return self.Q * self.p / (self.Q - self.ps)


@dataclass(frozen=True)
class TruncationPolicy:
    """Complement quadrature policy.

    R_t_factor: truncation radius as a multiple of the domain diameter;
    rounded up to the next power of two so the graded shells tile exactly.
    exterior_h_factor: level-0 exterior lattice spacing relative to the grid.
    """

    R_t_factor: float = 8.0
    exterior_h_factor: float = 1.0

    def __post_init__(self):
        if self.R_t_factor < 1.0:
            raise ConfigError(
                f"truncation radius below the domain diameter (factor {self.R_t_factor})")
        if self.exterior_h_factor <= 0:
            raise ConfigError("exterior_h_factor must be positive")

    @property
    def levels(self) -> int:
        return max(0, int(math.ceil(math.log2(self.R_t_factor))))

    @classmethod
    def from_json(cls, obj: dict | None) -> "TruncationPolicy":
        if obj is None:
            return cls()
        return cls(R_t_factor=float(obj.get("R_t_factor", 8.0)),
                   exterior_h_factor=float(obj.get("exterior_h_factor", 1.0)))


@dataclass(frozen=True)
class KernelTable:
    """Precomputed pair and complement weights of the energy quadrature."""

    grid: GridDomain
    fp: FracParams
    policy: TruncationPolicy
    w: np.ndarray              # (n, n) symmetric, zero diagonal
    b: np.ndarray              # (n,)
    sigma_s: float
    R_t: float

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def cache_key(self) -> str:
        ident = {
            "spec": self.grid.spec.to_json(),
            "group": self.grid.group.to_json(),
            "spacing": self.grid.spacing.tolist(),
            "s": self.fp.s, "p": self.fp.p,
            "R_t_factor": self.policy.R_t_factor,
            "exterior_h_factor": self.policy.exterior_h_factor,
        }
        return hashlib.sha256(json.dumps(ident, sort_keys=True).encode()).hexdigest()[:16]

    def save(self, path) -> None:
        np.savez_compressed(path, w=self.w, b=self.b,
                            sigma_s=self.sigma_s, R_t=self.R_t,
                            key=np.array(self.cache_key()))

    @classmethod
    def load(cls, path, grid: GridDomain, fp: FracParams,
             policy: TruncationPolicy) -> "KernelTable":
        data = np.load(path, allow_pickle=False)
        table = cls(grid, fp, policy, data["w"], data["b"],
                    float(data["sigma_s"]), float(data["R_t"]))
        if str(data["key"]) != table.cache_key():
            raise ConfigError("kernel cache does not match the requested instance")
        return table


def mc_ball_volume(cfg: GroupConfig, n_samples: int = 10_000_000,
                   seed: int = 2024) -> float:
    """Monte Carlo volume of the unit gauge ball."""
    rng = np.random.default_rng(seed)
    d = cfg.topo_dim
    # bounding box of the unit ball: first layer within 1, center coord within 1
    pts = rng.uniform(-1.0, 1.0, size=(n_samples, d))
    frac = np.mean(groups.gauge(cfg, pts) < 1.0)
    return float(frac * 2.0**d)


@lru_cache(maxsize=None)
def _sphere_constant(kind: str, n: int) -> float:
    cfg = GroupConfig(kind, n)
    if cfg.kind == groups.ABELIAN:
        vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    elif n == 1:
        vol = math.pi**2 / 2.0  # closed-form Koranyi unit-ball volume on H^1
    else:
        vol = mc_ball_volume(cfg)
    return cfg.Q * vol


def sphere_constant(cfg: GroupConfig) -> float:
    """Gauge-sphere surface constant sigma_S = Q * |B(0,1)|, so that
    integral over G of f(|x|) dx = sigma_S * integral f(r) r^(Q-1) dr."""
    return _sphere_constant(cfg.kind, cfg.n)


def exterior_shells(grid: GridDomain, policy: TruncationPolicy):
    """Graded lattice offsets covering {0 < |z| <= R_t}.

    Level 0 covers |z| <= R0 at (scaled) grid spacing; level m covers the
    annulus (R0*2^(m-1), R0*2^m] at dilated spacing, so every shell is the
    exact dilation image of a fixed reference shell.  Returns
    (shells, R0, R_t) with shells a list of (offsets, cell_measure).
    """
    g = grid.group
    R0 = grid.spec.diameter()
    exps = g.dilation_exponents
    shells = []
    base_spacing = grid.spacing * policy.exterior_h_factor
    from .grid import lattice_points

    for m in range(policy.levels + 1):
        spacing_m = base_spacing * (2.0**m) ** exps
        Rm = R0 * 2.0**m
        ext = Rm ** exps
        pts = lattice_points(spacing_m, -ext, ext)
        r = groups.gauge(g, pts)
        if m == 0:
            mask = r <= Rm
        else:
            mask = (r > R0 * 2.0 ** (m - 1)) & (r <= Rm)
        shells.append((pts[mask], float(np.prod(spacing_m))))
    return shells, R0, R0 * 2.0**policy.levels


def complement_mass(grid: GridDomain, fp: FracParams,
                    policy: TruncationPolicy, points: np.ndarray | None = None):
    """Kernel mass of G \\ Omega seen from each point (grid nodes by
    default): shell quadrature plus the analytic remainder beyond R_t."""
    g = grid.group
    if points is None:
        points = grid.nodes
    shells, _, R_t = exterior_shells(grid, policy)
    sigma = sphere_constant(g)
    remainder = sigma * R_t ** (-fp.ps) / fp.ps
    mass = np.full(points.shape[0], remainder)
    expo = fp.Q_plus_ps
    for pts, cell in shells:
        if pts.shape[0] == 0:
            continue
        kern = groups.gauge(g, pts) ** (-expo) * cell
        for i in range(points.shape[0]):
            y = groups.compose(g, points[i], pts)
            outside = ~grid.spec.contains(y)
            mass[i] += kern[outside].sum()
    return mass, R_t


def pair_distances(grid: GridDomain, block: int = 256) -> np.ndarray:
    """Dense matrix of homogeneous distances between interior nodes."""
    g, nodes = grid.group, grid.nodes
    n = nodes.shape[0]
    D = np.empty((n, n))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        D[lo:hi] = groups.hdistance(g, nodes[lo:hi, None, :], nodes[None, :, :])
    return D


def assemble(grid: GridDomain, fp: FracParams,
             policy: TruncationPolicy | None = None) -> KernelTable:
    """Assemble the pair and complement weights of the energy quadrature.

    The diagonal stays zero: the energy numerator vanishes at coincident
    nodes, so no near-field correction is applied.
    """
    if policy is None:
        policy = TruncationPolicy()
    if fp.Q != grid.group.Q:
        raise ConfigError(
            f"FracParams built for Q={fp.Q} but grid group has Q={grid.group.Q}")
    cell = grid.cell_measure
    D = pair_distances(grid)
    np.fill_diagonal(D, 1.0)
    w = D ** (-fp.Q_plus_ps) * cell * cell
    np.fill_diagonal(w, 0.0)
    mass, R_t = complement_mass(grid, fp, policy)
    b = 2.0 * cell * mass
    return KernelTable(grid, fp, policy, w, b, sphere_constant(grid.group), R_t)


def tail(values: np.ndarray, center: np.ndarray, R: float, fp: FracParams,
         grid: GridDomain) -> float:
    """Nonlocal tail of a field about `center` beyond gauge radius R:
    [R^(sp) * integral over complement of B_R of |v|^(p-1) / d^(Q+ps)]^(1/(p-1)).

    Fields vanish outside Omega, so the quadrature runs over the grid nodes
    outside the ball."""
    if R <= 0:
        raise ConfigError(f"tail radius must be positive, got {R}")
    d = groups.hdistance(grid.group, grid.nodes, center)
    mask = d >= R
    if not np.any(mask):
        return 0.0
    integ = np.sum(np.abs(values[mask]) ** (fp.p - 1.0) * d[mask] ** (-fp.Q_plus_ps))
    integ *= grid.cell_measure
    return float((R**fp.ps * integ) ** (1.0 / (fp.p - 1.0)))

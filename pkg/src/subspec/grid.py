"""Discretization of a bounded domain as a cell-centered coordinate lattice.

The Haar measure of every supported group is Lebesgue measure, so a uniform
lattice with cell weight prod(spacing) is an exact quadrature of volumes up
to the staircase boundary.  Nodes are the lattice points spacing*(k + 1/2)
that satisfy the domain membership predicate, ordered lexicographically in k
so that two builds of the same spec are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import groups
from .errors import ConfigError
from .groups import GroupConfig

GAUGE_BALL = "gauge_ball"
BOX = "box"


@dataclass(frozen=True)
class DomainSpec:
    """Bounded domain Omega: a quasi-ball in the gauge metric or a
    coordinate box."""

    shape: str
    group: GroupConfig
    radius: float | None = None
    center: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        d = self.group.topo_dim
        if self.shape == GAUGE_BALL:
            if self.radius is None or self.radius <= 0:
                raise ConfigError(f"gauge ball radius must be positive, got {self.radius}")
            c = np.zeros(d) if self.center is None else np.asarray(self.center, float)
            if c.shape != (d,):
                raise ConfigError(f"center has shape {c.shape}, expected ({d},)")
            object.__setattr__(self, "center", c)
        elif self.shape == BOX:
            lo = np.asarray(self.lo, float)
            hi = np.asarray(self.hi, float)
            if lo.shape != (d,) or hi.shape != (d,):
                raise ConfigError(f"box bounds must have shape ({d},)")
            if not np.all(lo < hi):
                raise ConfigError("box requires lo < hi componentwise")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        else:
            raise ConfigError(f"unknown domain shape {self.shape!r}")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Membership predicate, vectorized over leading dimensions."""
        pts = np.asarray(pts, float)
        if self.shape == GAUGE_BALL:
            return groups.hdistance(self.group, pts, self.center) < self.radius
        return np.all((pts > self.lo) & (pts < self.hi), axis=-1)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Conservative coordinate box containing the domain."""
        if self.shape == BOX:
            return self.lo.copy(), self.hi.copy()
        g, R, c = self.group, self.radius, self.center
        if g.kind == groups.ABELIAN:
            ext = np.full(g.topo_dim, R)
        else:
            n = g.n
            ext = np.empty(g.topo_dim)
            ext[: 2 * n] = R
            # left translate shears t: t = c_t + z_t + 2(<z_x,c_y> - <c_x,z_y>)
            ext[-1] = R * R + 2.0 * R * (np.sum(np.abs(c[:n])) + np.sum(np.abs(c[n : 2 * n])))
        return c - ext, c + ext

    def diameter(self) -> float:
        """Gauge-distance diameter (upper estimate for boxes)."""
        if self.shape == GAUGE_BALL:
            return 2.0 * self.radius
        lo, hi = self.bounding_box()
        corners = _box_corners(lo, hi)
        d = groups.hdistance(self.group, corners[:, None, :], corners[None, :, :])
        return float(d.max())

    def dilated(self, r: float) -> "DomainSpec":
        """Image of the domain under the group dilation D_r."""
        if self.shape == GAUGE_BALL:
            return DomainSpec(GAUGE_BALL, self.group, radius=r * self.radius,
                              center=groups.dilate(self.group, r, self.center))
        scale = r**self.group.dilation_exponents
        return DomainSpec(BOX, self.group, lo=self.lo * scale, hi=self.hi * scale)

    def to_json(self) -> dict:
        if self.shape == GAUGE_BALL:
            return {"shape": "gauge_ball", "radius": self.radius,
                    "center": self.center.tolist()}
        return {"shape": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_json(cls, obj: dict, group: GroupConfig) -> "DomainSpec":
        shape = obj.get("shape")
        if shape == "gauge_ball":
            return cls(GAUGE_BALL, group, radius=float(obj["radius"]),
                       center=np.asarray(obj["center"], float) if "center" in obj else None)
        if shape == "box":
            return cls(BOX, group, lo=np.asarray(obj["lo"], float),
                       hi=np.asarray(obj["hi"], float))
        raise ConfigError(f"unknown domain shape {shape!r}")


def _box_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    d = len(lo)
    idx = np.indices((2,) * d).reshape(d, -1).T
    return np.where(idx == 0, lo, hi)


@dataclass(frozen=True)
class GridDomain:
    """Interior nodes of a discretized domain, with exact cell measure.

    spacing is per coordinate; the base builder uses the same h everywhere,
    dilation matching makes it anisotropic.
    """

    group: GroupConfig
    spec: DomainSpec
    nodes: np.ndarray          # (n_nodes, topo_dim)
    spacing: np.ndarray        # (topo_dim,)
    bbox: tuple = field(repr=False, default=None)

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def measure(self) -> float:
        """Quadrature volume of Omega: node count times cell measure."""
        return self.n_nodes * self.cell_measure

    def to_csv(self, path) -> None:
        cols = ["index"] + [f"c{i}" for i in range(self.group.topo_dim)]
        data = np.column_stack([np.arange(self.n_nodes), self.nodes])
        np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="")


def lattice_points(spacing: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Cell-centered lattice points spacing*(k + 1/2) inside [lo, hi],
    lexicographic in k."""
    axes = []
    for s, a, b in zip(spacing, lo, hi):
        k0 = int(np.floor(a / s - 0.5))
        k1 = int(np.ceil(b / s - 0.5))
        axes.append((np.arange(k0, k1 + 1) + 0.5) * s)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def build_grid(spec: DomainSpec, h: float) -> GridDomain:
    """Cell-centered uniform grid of the interior of the domain."""
    if h <= 0:
        raise ConfigError(f"grid spacing must be positive, got {h}")
    d = spec.group.topo_dim
    spacing = np.full(d, float(h))
    lo, hi = spec.bounding_box()
    pts = lattice_points(spacing, lo, hi)
    nodes = pts[spec.contains(pts)]
    if nodes.shape[0] == 0:
        raise ConfigError(f"no interior node for {spec.to_json()} at h={h}")
    return GridDomain(spec.group, spec, nodes, spacing, (lo, hi))


def dilate_grid(grid: GridDomain, r: float) -> GridDomain:
    """Dilation-matched grid: every node is mapped through D_r, spacings
    scale anisotropically.  Node count is preserved exactly, the measure
    scales by exactly r^Q."""
    if r <= 0:
        raise ConfigError(f"dilation factor must be positive, got {r}")
    g = grid.group
    nodes = groups.dilate(g, r, grid.nodes)
    spacing = grid.spacing * r**g.dilation_exponents
    lo, hi = grid.bbox if grid.bbox is not None else (grid.nodes.min(0), grid.nodes.max(0))
    scale = r**g.dilation_exponents
    return GridDomain(g, grid.spec.dilated(r), nodes, spacing, (lo * scale, hi * scale))

"""Group algebra and homogeneous geometry for the supported stratified groups.

Two configurations are supported: the abelian group R^N and the Heisenberg
group H^n with coordinates laid out as (x in R^n, y in R^n, t).  All point
operations are pure and vectorized over leading array dimensions, so a
"point" argument may be a single coordinate vector or an (..., topo_dim)
stack of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

ABELIAN = "abelian"
HEISENBERG = "heisenberg"


@dataclass(frozen=True)
class GroupConfig:
    """Which stratified group we are working on.

    kind is "abelian" (parameter n = N, the dimension) or "heisenberg"
    (parameter n, giving coordinates (x, y, t) in R^n x R^n x R).
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in (ABELIAN, HEISENBERG):
            raise ConfigError(f"unknown group kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError(f"group parameter must be positive, got {self.n}")

    @classmethod
    def abelian(cls, dim: int) -> "GroupConfig":
        return cls(ABELIAN, dim)

    @classmethod
    def heisenberg(cls, n: int) -> "GroupConfig":
        return cls(HEISENBERG, n)

    @property
    def topo_dim(self) -> int:
        """Number of coordinates of a point."""
        return self.n if self.kind == ABELIAN else 2 * self.n + 1

    @property
    def Q(self) -> int:
        """Homogeneous dimension: N for R^N, 2n+2 for H^n."""
        return self.n if self.kind == ABELIAN else 2 * self.n + 2

    @property
    def dilation_exponents(self) -> np.ndarray:
        """Per-coordinate homogeneity exponents of the dilation D_r."""
        if self.kind == ABELIAN:
            return np.ones(self.n)
        e = np.ones(self.topo_dim)
        e[-1] = 2.0
        return e

    def to_json(self) -> dict:
        if self.kind == ABELIAN:
            return {"group": "abelian", "dim": self.n}
        return {"group": "heisenberg", "n": self.n}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupConfig":
        try:
            kind = obj["group"]
        except (KeyError, TypeError):
            raise ConfigError(f"group config must be a dict with a 'group' key, got {obj!r}")
        if kind == "abelian":
            return cls.abelian(int(obj["dim"]))
        if kind == "heisenberg":
            return cls.heisenberg(int(obj["n"]))
        raise ConfigError(f"unknown group kind {kind!r}")


def _check(cfg: GroupConfig, *points: np.ndarray) -> list[np.ndarray]:
    out = []
    for a in points:
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != cfg.topo_dim:
            raise ConfigError(
                f"point has {a.shape[-1]} coordinates, expected {cfg.topo_dim}"
            )
        out.append(a)
    return out


def compose(cfg: GroupConfig, a, b) -> np.ndarray:
    """Group product a o b.

    Heisenberg: (x,y,t) o (x',y',t') = (x+x', y+y', t+t'+2(<x',y> - <x,y'>));
    abelian: plain vector addition.
    """
    a, b = _check(cfg, a, b)
    if cfg.kind == ABELIAN:
        return a + b
    n = cfg.n
    ax, ay, at = a[..., :n], a[..., n : 2 * n], a[..., -1]
    bx, by, bt = b[..., :n], b[..., n : 2 * n], b[..., -1]
    t = at + bt + 2.0 * (np.sum(bx * ay, axis=-1) - np.sum(ax * by, axis=-1))
    return np.concatenate([ax + bx, ay + by, t[..., None]], axis=-1)


def inverse(cfg: GroupConfig, a) -> np.ndarray:
    """Group inverse; coordinate negation for both supported kinds."""
    (a,) = _check(cfg, a)
    return -a


def dilate(cfg: GroupConfig, r: float, a) -> np.ndarray:
    """Anisotropic dilation D_r: first layer scales by r, the Heisenberg
    center coordinate by r^2."""
    if r <= 0:
        raise ConfigError(f"dilation factor must be positive, got {r}")
    (a,) = _check(cfg, a)
    return a * r**cfg.dilation_exponents


def gauge(cfg: GroupConfig, a) -> np.ndarray:
    """Homogeneous quasi-norm: Euclidean norm on R^N, Koranyi gauge
    ((|x|^2 + |y|^2)^2 + t^2)^(1/4) on H^n."""
    (a,) = _check(cfg, a)
    if cfg.kind == ABELIAN:
        return np.sqrt(np.sum(a * a, axis=-1))
    n = cfg.n
    horiz = np.sum(a[..., : 2 * n] ** 2, axis=-1)
    t = a[..., -1]
    # two correctly-rounded square roots instead of **0.25, so the gauge
    # scales bit-exactly under power-of-two dilations
    return np.sqrt(np.sqrt(horiz * horiz + t * t))


def hdistance(cfg: GroupConfig, a, b) -> np.ndarray:
    """Left-invariant homogeneous distance gauge(b^{-1} o a)."""
    return gauge(cfg, compose(cfg, inverse(cfg, b), a))


def identity(cfg: GroupConfig) -> np.ndarray:
    return np.zeros(cfg.topo_dim)

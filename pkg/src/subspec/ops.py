"""Core energies, norms, weak operator action, and gradients.

The n^2 pair sums are the hot loop of every solver iteration; they are
served by the compiled core when the extension built, with a pure-numpy
fallback otherwise.  Set SUBSPEC_BACKEND=python to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import GridDomain
from .kernel import KernelTable

if os.environ.get("SUBSPEC_BACKEND", "").lower() == "python":
    from . import _corepy as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _corepy as _impl

        BACKEND = "python"


@dataclass
class Field:
    """Node values of a function on Omega, implicitly zero outside."""

    values: np.ndarray
    grid: GridDomain

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ConfigError(
                f"field has {self.values.shape} values for {self.grid.n_nodes} nodes")

    @classmethod
    def zeros(cls, grid: GridDomain) -> "Field":
        return cls(np.zeros(grid.n_nodes), grid)

    @classmethod
    def from_function(cls, grid: GridDomain, fn) -> "Field":
        return cls(np.asarray([fn(x) for x in grid.nodes], dtype=float), grid)

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid)

    def to_csv(self, path) -> None:
        data = np.column_stack([np.arange(self.grid.n_nodes), self.values])
        np.savetxt(path, data, delimiter=",", header="index,value", comments="")

    @classmethod
    def from_csv(cls, path, grid: GridDomain) -> "Field":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 1], grid)

    def to_binary(self, path) -> None:
        self.values.tofile(path)

    @classmethod
    def from_binary(cls, path, grid: GridDomain) -> "Field":
        return cls(np.fromfile(path, dtype=float), grid)


def _vals(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.ascontiguousarray(u, float)


def gagliardo_energy(u, K: KernelTable, p: float | None = None) -> float:
    """[u]^p over the quadrature: ordered pair sum plus complement term.
    Returns the p-th power of the seminorm."""
    p = K.fp.p if p is None else p
    return _impl.energy(K.w, K.b, _vals(u), p)


def lp_norm_pow(u, r: float, grid: GridDomain | None = None) -> float:
    """Cell quadrature of |u|^r over Omega (the r-th power of the norm)."""
    if isinstance(u, Field) and grid is None:
        grid = u.grid
    if r < 1:
        raise ConfigError(f"norm exponent must be >= 1, got {r}")
    return float(grid.cell_measure * np.sum(np.abs(_vals(u)) ** r))


def weight_integral(u, weight: np.ndarray, r: float, grid: GridDomain) -> float:
    """Cell quadrature of weight * |u|^r; exponents below 1 are allowed here
    (the singular problem uses r = 1 - delta)."""
    return float(grid.cell_measure * np.sum(weight * np.abs(_vals(u)) ** r))


def weak_action(u, v, K: KernelTable, p: float | None = None) -> float:
    """Weak form of the fractional p-sub-Laplacian applied to u, tested
    against v; coincides with gagliardo_energy(u) at v = u."""
    p = K.fp.p if p is None else p
    return _impl.weak_action(K.w, K.b, _vals(u), _vals(v), p)


def energy_gradient(u, K: KernelTable, p: float | None = None) -> np.ndarray:
    """Euclidean gradient of gagliardo_energy with respect to node values."""
    p = K.fp.p if p is None else p
    return _impl.gradient(K.w, K.b, _vals(u), p)


def monotonicity_gap(u, v, K: KernelTable, p: float | None = None) -> dict:
    """Strict-monotonicity pairing of the operator at u and v, together
    with the seminorm term it dominates (up to an unspecified constant)."""
    p = K.fp.p if p is None else p
    uv = _vals(u)
    vv = _vals(v)
    if np.array_equal(uv, vv):
        raise ConfigError("monotonicity gap needs two distinct fields")
    d = uv - vv
    lhs = _impl.weak_action(K.w, K.b, uv, d, p) - _impl.weak_action(K.w, K.b, vv, d, p)
    ed = _impl.energy(K.w, K.b, d, p)
    if p >= 2.0:
        rhs = ed
    else:
        eu = _impl.energy(K.w, K.b, uv, p)
        ev = _impl.energy(K.w, K.b, vv, p)
        rhs = ed ** (2.0 / p) / (eu + ev) ** ((2.0 - p) / p)
    return {"lhs": lhs, "rhs_seminorm_term": rhs}

"""Pure-numpy implementation of the hot energy kernels.

Row-blocked so the n^2 temporaries stay bounded; block order is fixed, so
repeated evaluations are bit-identical.
"""

from __future__ import annotations

import numpy as np

BLOCK = 512


def _jp(t: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return t
    return np.sign(t) * np.abs(t) ** (p - 1.0)


def energy(w: np.ndarray, b: np.ndarray, u: np.ndarray, p: float) -> float:
    """Ordered double sum over pairs plus the complement term; returns the
    p-th power of the seminorm."""
    n = u.shape[0]
    total = 0.0
    for lo in range(0, n, BLOCK):
        hi = min(lo + BLOCK, n)
        du = u[lo:hi, None] - u[None, :]
        if p == 2.0:
            total += float(np.sum(w[lo:hi] * du * du))
        else:
            total += float(np.sum(w[lo:hi] * np.abs(du) ** p))
    total += float(np.sum(b * np.abs(u) ** p))
    return total


def weak_action(w: np.ndarray, b: np.ndarray, u: np.ndarray, v: np.ndarray,
                p: float) -> float:
    n = u.shape[0]
    total = 0.0
    for lo in range(0, n, BLOCK):
        hi = min(lo + BLOCK, n)
        du = u[lo:hi, None] - u[None, :]
        dv = v[lo:hi, None] - v[None, :]
        total += float(np.sum(w[lo:hi] * _jp(du, p) * dv))
    total += float(np.sum(b * _jp(u, p) * v))
    return total


def gradient(w: np.ndarray, b: np.ndarray, u: np.ndarray, p: float) -> np.ndarray:
    """Exact gradient of energy(): 2p sum_j w_ij J_p(u_i - u_j) + p b_i J_p(u_i)."""
    n = u.shape[0]
    g = np.empty(n)
    for lo in range(0, n, BLOCK):
        hi = min(lo + BLOCK, n)
        du = u[lo:hi, None] - u[None, :]
        g[lo:hi] = 2.0 * p * np.sum(w[lo:hi] * _jp(du, p), axis=1)
    g += p * b * _jp(u, p)
    return g

"""Numerical variational solver and verification suite for fractional
p-sub-Laplacian problems on stratified Lie groups."""

from .ops import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"

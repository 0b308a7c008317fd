"""Product-space reformulation of N-set feasibility.

A product point is stored as an ``(N, ...)`` array whose leading axis
indexes blocks; each block may itself be multi-dimensional (the Sudoku
solver uses ``(5, n, n, n)``).  ``x`` lies in every ``C_i`` iff the
replicated tuple ``(x, ..., x)`` lies in ``C x D``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .core import ConstraintSet, as_point

__all__ = [
    "ProductSet",
    "DiagonalSet",
    "project_product",
    "project_diagonal",
    "lift",
    "drop",
    "product_dr_step",
    "flat_step",
]


def _blocks(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim < 2:
        raise ValueError("a product point needs a leading block axis")
    return X


class ProductSet(ConstraintSet):
    """``C_1 x ... x C_N``; factors may be set objects or plain callables."""

    def __init__(self, factors: Sequence):
        if len(factors) < 1:
            raise ValueError("need at least one factor")
        self.factors = list(factors)
        dims = {getattr(f, "dim", None) for f in self.factors} - {None}
        if len(dims) > 1:
            raise ValueError("factors must share an ambient dimension")
        self.is_convex = all(getattr(f, "is_convex", False) for f in self.factors)

    @property
    def N(self) -> int:
        return len(self.factors)

    def project(self, X):
        return project_product(self, X)


def _apply(f, x):
    if hasattr(f, "project"):
        return f.project(x)
    return f(x)


def project_product(C: ProductSet, X) -> np.ndarray:
    """Blockwise projection ``(P_{C_1} x_1, ..., P_{C_N} x_N)``."""
    X = _blocks(X)
    if X.shape[0] != C.N:
        raise ValueError(f"expected {C.N} blocks, got {X.shape[0]}")
    out = np.empty_like(X)
    for i, f in enumerate(C.factors):
        out[i] = np.reshape(_apply(f, X[i]), X.shape[1:])
    return out


def project_diagonal(X) -> np.ndarray:
    """Replace every block by the blockwise mean."""
    X = _blocks(X)
    return np.broadcast_to(X.mean(axis=0), X.shape).copy()


class DiagonalSet(ConstraintSet):
    is_convex = True

    def project(self, X):
        return project_diagonal(X)


def lift(x, N: int) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(x, (N,) + x.shape).copy()


def drop(X) -> np.ndarray:
    """Diagonal representative of a product point (the blockwise mean)."""
    return _blocks(X).mean(axis=0)


def product_dr_step(C: ProductSet, X, d_first: bool = True) -> np.ndarray:
    """One DR step between the product set and the diagonal.

    With ``d_first`` (the default) this is ``T_{D,C} = (I + R_C R_D)/2``,
    computed as ``X + P_C(2 P_D X - X) - P_D X``; otherwise ``T_{C,D}``.
    """
    X = _blocks(X)
    if d_first:
        p = project_diagonal(X)
        return X + project_product(C, 2.0 * p - X) - p
    p = project_product(C, X)
    return X + project_diagonal(2.0 * p - X) - p


def flat_step(C: ProductSet, block_shape, d_first: bool = True) -> Callable:
    """Wrap :func:`product_dr_step` as a map on flat vectors for :func:`core.run`."""
    N = C.N

    def step(x):
        X = as_point(x).reshape((N,) + tuple(block_shape))
        return product_dr_step(C, X, d_first=d_first).ravel()

    return step

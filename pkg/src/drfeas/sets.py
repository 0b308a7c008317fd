"""Concrete projector catalog.

Each set is a small class with a ``project`` method; the module-level
``project_*`` functions carry the actual formulas so they can be called on
raw arrays as well.  Nonconvex sets return one selected nearest point, with
the tie-breaking rule documented per set.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import AmbiguousProjection, ConstraintSet, as_point

__all__ = [
    "WholeSpace",
    "AffineSubspace",
    "Hyperplane",
    "Ball",
    "SphereSet",
    "Box",
    "HalfLine",
    "FinitePointSet",
    "EllipseSet",
    "Spheroid",
    "PermutationSet",
    "BasisVectorSet",
    "project_affine",
    "project_sphere",
    "project_halfline",
    "project_ellipse",
    "ellipse_secular",
    "project_permutations",
    "project_permutations_along",
    "project_basis",
    "project_basis_along",
    "project_finite",
    "sphere_line_step",
]


# ---------------------------------------------------------------------------
# convex sets


class WholeSpace(ConstraintSet):
    is_convex = True

    def __init__(self, dim: int):
        self.dim = int(dim)

    def project(self, x):
        return as_point(x).copy()


class AffineSubspace(ConstraintSet):
    """``basepoint + span(basis)`` with an orthonormal basis (rows of ``basis``)."""

    is_convex = True

    def __init__(self, basepoint, basis):
        self.basepoint = as_point(basepoint)
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if basis.size == 0:
            basis = np.zeros((0, self.basepoint.shape[0]))
        if basis.shape[1] != self.basepoint.shape[0]:
            raise ValueError("basis vectors and basepoint differ in dimension")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-10):
            raise ValueError("basis must be orthonormal; use AffineSubspace.span")
        self.basis = basis
        self.dim = self.basepoint.shape[0]

    @classmethod
    def span(cls, directions, basepoint=None):
        """Subspace through ``basepoint`` spanned by arbitrary (independent) directions."""
        D = np.atleast_2d(np.asarray(directions, dtype=float))
        q, r = np.linalg.qr(D.T)
        keep = np.abs(np.diag(r)) > 1e-12
        if basepoint is None:
            basepoint = np.zeros(D.shape[1])
        return cls(basepoint, q[:, keep].T)

    @classmethod
    def line(cls, direction, point=None):
        return cls.span([direction], point)

    def project(self, x):
        return project_affine(self, x)


def project_affine(S: AffineSubspace, x) -> np.ndarray:
    x = as_point(x)
    d = x - S.basepoint
    return S.basepoint + S.basis.T @ (S.basis @ d)


class Hyperplane(ConstraintSet):
    """``{x : <normal, x> = offset}``."""

    is_convex = True

    def __init__(self, normal, offset: float = 0.0):
        self.normal = as_point(normal)
        self.offset = float(offset)
        self.dim = self.normal.shape[0]
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0:
            raise ValueError("normal must be nonzero")

    def project(self, x):
        x = as_point(x)
        return x - (self.normal @ x - self.offset) / self._nn * self.normal


class Ball(ConstraintSet):
    is_convex = True

    def __init__(self, center, radius: float = 1.0):
        self.center = as_point(center)
        self.radius = float(radius)
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        self.dim = self.center.shape[0]

    def project(self, x):
        x = as_point(x)
        d = x - self.center
        r = np.linalg.norm(d)
        if r <= self.radius:
            return x.copy()
        return self.center + self.radius / r * d


class Box(ConstraintSet):
    is_convex = True

    def __init__(self, lower, upper):
        self.lower = as_point(lower)
        self.upper = as_point(upper)
        if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
            raise ValueError("invalid box bounds")
        self.dim = self.lower.shape[0]

    def project(self, x):
        return np.clip(as_point(x), self.lower, self.upper)


# ---------------------------------------------------------------------------
# nonconvex sets


class SphereSet(ConstraintSet):
    def __init__(self, center, radius: float = 1.0):
        self.center = as_point(center)
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        self.dim = self.center.shape[0]

    @classmethod
    def unit(cls, dim: int = 2):
        return cls(np.zeros(dim), 1.0)

    def project(self, x):
        return project_sphere(self, x)


def project_sphere(S: SphereSet, x) -> np.ndarray:
    """Radial projection; the center is equidistant from every point and raises."""
    x = as_point(x)
    d = x - S.center
    r = np.linalg.norm(d)
    if r == 0:
        raise AmbiguousProjection()
    return S.center + S.radius / r * d


class HalfLine(ConstraintSet):
    """``{(x1, 0) : x1 <= bound}`` in the plane."""

    is_convex = True
    dim = 2

    def __init__(self, bound: float):
        self.bound = float(bound)

    def project(self, x):
        return project_halfline(self, x)


def project_halfline(S: HalfLine, x) -> np.ndarray:
    x = as_point(x)
    if x.shape[0] != 2:
        raise ValueError("half-line lives in R^2")
    return np.array([min(x[0], S.bound), 0.0])


class FinitePointSet(ConstraintSet):
    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("need at least one point")
        self.points = pts
        self.dim = pts.shape[1]
        self.is_convex = pts.shape[0] == 1

    def project(self, x):
        return project_finite(self, x)


def project_finite(S: FinitePointSet, x) -> np.ndarray:
    """Nearest listed point; the first listed wins ties."""
    x = as_point(x)
    d = np.sum((S.points - x) ** 2, axis=1)
    return S.points[int(np.argmin(d))].copy()


# ---------------------------------------------------------------------------
# ellipses


def ellipse_secular(a, b, u, v, t):
    """Left-hand side of ``a^2 u^2/(a^2-t)^2 + b^2 v^2/(b^2-t)^2``."""
    return a * a * u * u / (a * a - t) ** 2 + b * b * v * v / (b * b - t) ** 2


def _solve_gap(ci, cj, delta):
    """Root ``s > 0`` of ``ci^2/s^2 + cj^2/(s+delta)^2 = 1`` with ``ci > 0``.

    ``s = min(a^2, b^2) - t`` is the gap to the pole, which keeps precision
    when the root sits close to it.  The function is strictly decreasing on
    ``s > 0`` and the root lies in ``[ci, hypot(ci, cj)]``.
    """

    def g(s):
        return (ci / s) ** 2 + (cj / (s + delta)) ** 2 - 1.0

    lo, hi = ci, math.hypot(ci, cj)
    if g(hi) >= 0:
        return hi
    while hi - lo > 1e-6 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    # g is convex and decreasing: Newton from the left end stays left of the root
    s = lo
    for _ in range(60):
        gs = g(s)
        if gs <= 0:
            hi = s
        else:
            lo = s
        dg = -2.0 * ci * ci / s**3 - 2.0 * cj * cj / (s + delta) ** 3
        s_new = s - gs / dg
        if not lo <= s_new <= hi:
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1e-16 * s:
            s = s_new
            break
        s = s_new
    return s


def _project_ellipse_local(a: float, b: float, u: float, v: float):
    """Nearest point on ``x^2/a^2 + y^2/b^2 = 1`` to ``(u, v)``; returns (p, t)."""
    semi = (a, b)
    coord = (u, v)
    i = 0 if a < b else 1  # minor axis (ties: axis 1)
    j = 1 - i
    ri, rj = semi[i], semi[j]
    xi, xj = abs(coord[i]), abs(coord[j])
    ci, cj = ri * xi, rj * xj
    delta = rj * rj - ri * ri
    p = [0.0, 0.0]
    if ci == 0.0:
        if cj == 0.0 and delta == 0.0:
            raise AmbiguousProjection()
        if cj <= delta:
            # on the major axis, inside the evolute: the minor-axis coordinate leaves 0
            pj = rj * rj * xj / delta
            p[j] = pj
            p[i] = ri * math.sqrt(max(0.0, 1.0 - (pj / rj) ** 2))
            s = 0.0
        else:
            s = cj - delta
            p[j] = rj
    else:
        s = _solve_gap(ci, cj, delta)
        p[i] = ri * ri * xi / s
        p[j] = rj * rj * xj / (s + delta)
    p[0] = math.copysign(p[0], coord[0]) if coord[0] != 0 else p[0]
    p[1] = math.copysign(p[1], coord[1]) if coord[1] != 0 else p[1]
    return np.array(p), ri * ri - s


class EllipseSet(ConstraintSet):
    """Boundary of an ellipse in the plane with semi-axes ``a`` (local x) and ``b``.

    ``center`` and ``angle`` (radians, counter-clockwise) place the ellipse;
    by default it is axis-aligned at the origin.
    """

    dim = 2

    def __init__(self, a: float, b: float, center=(0.0, 0.0), angle: float = 0.0):
        if not (a > 0 and b > 0):
            raise ValueError("semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)
        self.center = as_point(center)
        self.angle = float(angle)
        c, s = math.cos(self.angle), math.sin(self.angle)
        self._rot = np.array([[c, -s], [s, c]])

    def to_local(self, x):
        return self._rot.T @ (as_point(x) - self.center)

    def to_global(self, y):
        return self.center + self._rot @ y

    def project(self, x):
        return project_ellipse(self, x)

    def residual(self, x) -> float:
        """``|(u/a)^2 + (v/b)^2 - 1|`` in the local frame."""
        u, v = self.to_local(x)
        return abs((u / self.a) ** 2 + (v / self.b) ** 2 - 1.0)


def project_ellipse(S: EllipseSet, x) -> np.ndarray:
    """Nearest boundary point via the secular equation in ``t``.

    The local nearest point is ``(a^2 u/(a^2-t), b^2 v/(b^2-t))`` where ``t`` is
    the unique root below ``min(a^2, b^2)``.  When the input lies on the major
    axis close enough to the center that no such root exists, the pole
    ``t = min(a^2, b^2)`` is taken and the minor coordinate is positive.
    """
    x = as_point(x)
    if x.shape[0] != 2:
        raise ValueError("ellipse lives in R^2")
    u, v = S.to_local(x)
    p, _ = _project_ellipse_local(S.a, S.b, u, v)
    return S.to_global(p)


class Spheroid(ConstraintSet):
    """Surface of revolution of an ellipse about ``axis`` in R^n.

    ``a`` is the semi-axis along ``axis``, ``b`` the equatorial radius.  The
    projection reduces to the planar ellipse spanned by the axis and the
    radial direction of the input.
    """

    def __init__(self, center, axis, a: float, b: float):
        self.center = as_point(center)
        ax = as_point(axis)
        self.axis = ax / np.linalg.norm(ax)
        self.a = float(a)
        self.b = float(b)
        if not (self.a > 0 and self.b > 0):
            raise ValueError("semi-axes must be positive")
        self.dim = self.center.shape[0]

    def project(self, x):
        x = as_point(x)
        d = x - self.center
        u = float(d @ self.axis)
        w = d - u * self.axis
        r = float(np.linalg.norm(w))
        if r > 0:
            radial = w / r
        else:
            # any perpendicular direction; pick the first coordinate axis not parallel
            k = int(np.argmin(np.abs(self.axis)))
            e = np.zeros(self.dim)
            e[k] = 1.0
            radial = e - (e @ self.axis) * self.axis
            radial /= np.linalg.norm(radial)
        p, _ = _project_ellipse_local(self.a, self.b, u, r)
        return self.center + p[0] * self.axis + p[1] * radial


# ---------------------------------------------------------------------------
# combinatorial sets


class PermutationSet(ConstraintSet):
    """All rearrangements of a fixed multiset of reals."""

    def __init__(self, values: Sequence[float]):
        vals = np.sort(np.asarray(values, dtype=float).ravel())
        if vals.size < 1:
            raise ValueError("need at least one value")
        self.values = vals
        self.dim = vals.size

    def project(self, x):
        return project_permutations(self, x)

    def contains(self, x, tol=1e-10):
        x = as_point(x)
        return x.shape[0] == self.dim and bool(np.all(np.abs(np.sort(x) - self.values) <= tol))


def project_permutations(S: PermutationSet, x) -> np.ndarray:
    """Arrange the values so their ranking matches the ranking of ``x``.

    Pairs the ascending targets with positions sorted by descending ``x``;
    equal coordinates are ranked by index (a stable sort), which is one of
    the valid nearest points.
    """
    x = as_point(x)
    if x.shape[0] != S.dim:
        raise ValueError("dimension mismatch")
    order = np.argsort(-x, kind="stable")
    p = np.empty_like(x)
    p[order] = S.values[::-1]
    return p


def project_permutations_along(X, values, axis=-1) -> np.ndarray:
    """Permutation projection applied to every 1-D fiber of ``X`` along ``axis``."""
    X = np.asarray(X, dtype=float)
    desc = np.sort(np.asarray(values, dtype=float))[::-1]
    Xm = np.moveaxis(X, axis, -1)
    if Xm.shape[-1] != desc.size:
        raise ValueError("fiber length does not match number of values")
    order = np.argsort(-Xm, axis=-1, kind="stable")
    out = np.empty_like(Xm)
    np.put_along_axis(out, order, np.broadcast_to(desc, Xm.shape), axis=-1)
    return np.moveaxis(out, -1, axis)


class BasisVectorSet(ConstraintSet):
    """``{e_1, ..., e_n}``."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        self.dim = self.n

    def project(self, x):
        return project_basis(self, x)


def project_basis(S: BasisVectorSet, x) -> np.ndarray:
    """``e_i`` for the smallest index ``i`` attaining the largest coordinate."""
    x = as_point(x)
    if x.shape[0] != S.n:
        raise ValueError("dimension mismatch")
    p = np.zeros_like(x)
    p[int(np.argmax(x))] = 1.0
    return p


def project_basis_along(X, axis=-1) -> np.ndarray:
    """Basis-vector projection of every fiber of ``X`` along ``axis``."""
    X = np.asarray(X, dtype=float)
    idx = np.expand_dims(np.argmax(X, axis=axis), axis)
    out = np.zeros_like(X)
    np.put_along_axis(out, idx, 1.0, axis=axis)
    return out


# ---------------------------------------------------------------------------
# sphere and line


def sphere_line_step(x, alpha: float) -> np.ndarray:
    """Closed-form DR step for the unit sphere and the line ``R e_1 + alpha e_2``.

    With ``rho = ||x||``: the first coordinate becomes ``x_1/rho``, the second
    ``alpha + (1 - 1/rho) x_2``, and every further coordinate is scaled by
    ``1 - 1/rho``.
    """
    x = as_point(x)
    if x.shape[0] < 2:
        raise ValueError("need dimension >= 2")
    rho = np.linalg.norm(x)
    if rho == 0:
        raise ValueError("sphere_line_step undefined at the origin")
    shrink = 1.0 - 1.0 / rho
    out = shrink * x
    out[0] = x[0] / rho
    out[1] = alpha + shrink * x[1]
    return out

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import ellipse_grid_argmin, permutation_min_distance

from drfeas.core import AmbiguousProjection, StopRule, dr_step, run
from drfeas.sets import (
    AffineSubspace,
    Ball,
    BasisVectorSet,
    Box,
    EllipseSet,
    FinitePointSet,
    HalfLine,
    Hyperplane,
    PermutationSet,
    SphereSet,
    Spheroid,
    WholeSpace,
    _project_ellipse_local,
    ellipse_secular,
    project_basis_along,
    project_permutations_along,
    sphere_line_step,
)

SQ3 = math.sqrt(3)
R2 = 1 / math.sqrt(2)


# --- affine -----------------------------------------------------------------


def test_affine_examples():
    x0 = [-SQ3, -1]
    np.testing.assert_allclose(AffineSubspace.line([0, 1]).project(x0), [0, -1], atol=1e-15)
    C = AffineSubspace.line([-SQ3 / 2, 0.5])
    np.testing.assert_allclose(C.project(x0), [-SQ3 / 2, 0.5], atol=1e-15)


def test_affine_member_fixed_and_residual_orthogonal():
    rng = np.random.default_rng(0)
    S = AffineSubspace.span(rng.normal(size=(2, 5)), rng.normal(size=5))
    for _ in range(20):
        x = rng.normal(size=5)
        p = S.project(x)
        np.testing.assert_allclose(S.basis @ (x - p), 0, atol=1e-12)
        np.testing.assert_allclose(S.project(p), p, atol=1e-12)


def test_affine_requires_orthonormal():
    with pytest.raises(ValueError):
        AffineSubspace([0, 0], [[1, 1]])


def test_hyperplane_box_ball_whole():
    H = Hyperplane([1, 1], 2)
    np.testing.assert_allclose(H.project([0, 0]), [1, 1])
    np.testing.assert_allclose(Box([0, 0], [1, 1]).project([2, -1]), [1, 0])
    np.testing.assert_allclose(Ball([0, 0], 2).project([4, 0]), [2, 0])
    np.testing.assert_allclose(Ball([0, 0], 2).project([1, 0]), [1, 0])
    np.testing.assert_allclose(WholeSpace(2).project([3, 4]), [3, 4])


# --- sphere / half-line / finite ----------------------------------------------


def test_sphere_examples():
    S = SphereSet.unit(2)
    np.testing.assert_allclose(S.project([2, 0]), [1, 0])
    m = [0.5, 0.5 * SQ3]
    np.testing.assert_allclose(S.project(m), m, atol=1e-15)
    np.testing.assert_allclose(S.project([0.4, 0.3]), [0.8, 0.6], atol=1e-15)


def test_sphere_center_ambiguous():
    with pytest.raises(AmbiguousProjection):
        SphereSet([1, 1], 2).project([1, 1])


def test_halfline_examples():
    H = HalfLine(0.8)
    np.testing.assert_allclose(H.project([1.2, 0.3]), [0.8, 0])
    np.testing.assert_allclose(H.project([0.5, 7]), [0.5, 0])
    np.testing.assert_allclose(H.project([1.2, 0.9]), [0.8, 0])


def test_finite_examples():
    F = FinitePointSet([[0.8, 0], [-1, 0]])
    # distances from (6/5, 9/10): to (4/5,0) is sqrt(0.16+0.81), to (-1,0) is sqrt(4.84+0.81)
    np.testing.assert_allclose(F.project([1.2, 0.9]), [0.8, 0])
    single = FinitePointSet([[3, 3]])
    for x in ([0, 0], [10, -4]):
        np.testing.assert_allclose(single.project(x), [3, 3])
    np.testing.assert_allclose(F.project([-1, 0]), [-1, 0])
    tie = FinitePointSet([[1, 0], [-1, 0]])
    np.testing.assert_allclose(tie.project([0, 5]), [1, 0])


# --- ellipse -------------------------------------------------------------------


def test_ellipse_examples():
    np.testing.assert_allclose(EllipseSet(1, 1).project([2, 0]), [1, 0])
    np.testing.assert_allclose(EllipseSet(2, 1).project([0, 5]), [0, 1])
    p = EllipseSet(2, 1).project([2, 1])
    np.testing.assert_allclose(p, ellipse_grid_argmin(2, 1, [2, 1]), atol=1e-6)


def test_ellipse_center_cases():
    with pytest.raises(AmbiguousProjection):
        EllipseSet(1, 1).project([0, 0])
    np.testing.assert_allclose(EllipseSet(2, 1).project([0, 0]), [0, 1])
    np.testing.assert_allclose(EllipseSet(1, 3).project([0, 0]), [1, 0])


def test_ellipse_major_axis_inside_evolute():
    # (1/2, 0) against a=2, b=1: the minimizer leaves the axis
    p = EllipseSet(2, 1).project([0.5, 0])
    q = ellipse_grid_argmin(2, 1, [0.5, 0], n=10**6)
    assert np.linalg.norm(p - [0.5, 0]) == pytest.approx(np.linalg.norm(q - [0.5, 0]), abs=1e-9)
    np.testing.assert_allclose(p, [2 / 3, math.sqrt(8) / 3], atol=1e-12)


def test_ellipse_major_axis_outside_evolute():
    np.testing.assert_allclose(EllipseSet(2, 1).project([3, 0]), [2, 0], atol=1e-12)
    np.testing.assert_allclose(EllipseSet(2, 1).project([-1.9, 0]), [-2, 0], atol=1e-12)


def test_ellipse_kkt_and_secular_residual():
    rng = np.random.default_rng(11)
    for _ in range(300):
        a, b = rng.uniform(0.3, 3, 2)
        u, v = rng.uniform(-4, 4, 2)
        p, t = _project_ellipse_local(a, b, u, v)
        assert abs(ellipse_secular(a, b, u, v, t) - 1) <= 1e-10
        assert abs((p[0] / a) ** 2 + (p[1] / b) ** 2 - 1) <= 1e-10
        normal = np.array([p[0] / a**2, p[1] / b**2])
        r = np.array([u, v]) - p
        cross = abs(r[0] * normal[1] - r[1] * normal[0])
        assert cross <= 1e-8 * np.linalg.norm(r) * np.linalg.norm(normal) + 1e-14


def test_ellipse_grid_oracle_small():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a, b = rng.uniform(0.5, 2, 2)
        x = rng.uniform(-3, 3, 2)
        np.testing.assert_allclose(EllipseSet(a, b).project(x), ellipse_grid_argmin(a, b, x), atol=1e-6)


def test_ellipse_rotated_translated():
    E = EllipseSet(2, 1, center=(1, -1), angle=0.3)
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.uniform(-3, 3, 2)
        p = E.project(x)
        assert E.residual(p) <= 1e-10
        # against the untransformed projector in local coordinates
        local = EllipseSet(2, 1).project(E.to_local(x))
        np.testing.assert_allclose(p, E.to_global(local), atol=1e-12)


def test_spheroid_reduces_to_ellipse():
    S = Spheroid([0, 0, 0], [0, 0, 1], a=2.0, b=1.0)
    x = np.array([0.6, 0.8, 1.5])  # radial distance 1
    p = S.project(x)
    q = EllipseSet(2.0, 1.0).project([1.5, 1.0])  # (axial, radial)
    np.testing.assert_allclose(p, [0.6 * q[1], 0.8 * q[1], q[0]], atol=1e-12)
    assert abs((p[2] / 2) ** 2 + (p[0] ** 2 + p[1] ** 2) - 1) <= 1e-10


# --- permutations / basis --------------------------------------------------------


def test_permutation_examples():
    S = PermutationSet(range(1, 10))
    x = np.array([3, 1, 9, 2, 8, 7, 4, 6, 5], float)
    np.testing.assert_array_equal(S.project(x), x)
    T = PermutationSet([1, 2, 3])
    np.testing.assert_array_equal(T.project([0.1, 5, 2]), [1, 3, 2])
    p = T.project([0, 0, 0])
    assert np.linalg.norm(p) == pytest.approx(permutation_min_distance([1, 2, 3], [0, 0, 0]))
    assert np.linalg.norm(p) == pytest.approx(math.sqrt(14))
    assert T.contains(p)


def test_permutation_brute_force_small():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = rng.integers(1, 6)
        vals = rng.integers(-3, 4, size=n).astype(float)
        x = rng.normal(size=n)
        p = PermutationSet(vals).project(x)
        assert sorted(p) == sorted(vals)
        assert np.linalg.norm(p - x) == pytest.approx(permutation_min_distance(vals, x), abs=1e-12)


def test_permutations_along_matches_rowwise():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(6, 4))
    vals = [1, 2, 3, 4]
    rowwise = np.stack([PermutationSet(vals).project(r) for r in X])
    np.testing.assert_array_equal(project_permutations_along(X, vals, axis=1), rowwise)
    colwise = np.stack([PermutationSet(range(6)).project(c) for c in X.T], axis=1)
    np.testing.assert_array_equal(project_permutations_along(X, range(6), axis=0), colwise)


def test_basis_examples():
    S = BasisVectorSet(3)
    np.testing.assert_array_equal(S.project([0.2, 0.9, 0.1]), [0, 1, 0])
    np.testing.assert_array_equal(S.project([0, 0, 1]), [0, 0, 1])
    np.testing.assert_array_equal(BasisVectorSet(2).project([0.5, 0.5]), [1, 0])


def test_basis_brute_force():
    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        x = rng.normal(size=n)
        p = BasisVectorSet(n).project(x)
        best = min(np.linalg.norm(np.eye(n)[i] - x) for i in range(n))
        assert np.linalg.norm(p - x) == pytest.approx(best, abs=1e-12)


def test_basis_along_axis():
    X = np.array([[[0.1, 0.7], [0.3, 0.2]], [[0.9, 0.1], [0.4, 0.4]]])
    out = project_basis_along(X, axis=2)
    np.testing.assert_array_equal(out, [[[0, 1], [1, 0]], [[1, 0], [1, 0]]])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6), st.data())
def test_permutation_projection_optimal(x, data):
    vals = data.draw(st.lists(st.integers(-5, 5), min_size=len(x), max_size=len(x)))
    p = PermutationSet(vals).project(x)
    assert np.linalg.norm(p - np.asarray(x)) <= permutation_min_distance(vals, x) + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=4), st.data())
def test_finite_projection_optimal(x, data):
    n = len(x)
    pts = data.draw(
        st.lists(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n), min_size=1, max_size=6)
    )
    p = FinitePointSet(pts).project(x)
    best = min(np.linalg.norm(np.asarray(q) - x) for q in pts)
    assert np.linalg.norm(p - x) == pytest.approx(best)


def test_projectors_return_members():
    rng = np.random.default_rng(8)
    sets = [
        (SphereSet([1, 2], 1.5), lambda p: abs(np.linalg.norm(p - [1, 2]) - 1.5)),
        (EllipseSet(1.5, 0.5, center=(0.2, 0.1), angle=1.0), None),
        (HalfLine(0.3), lambda p: abs(p[1]) + max(p[0] - 0.3, 0)),
        (Ball([0, 0], 1), lambda p: max(np.linalg.norm(p) - 1, 0)),
        (PermutationSet([0, 1]), lambda p: np.abs(np.sort(p) - [0, 1]).max()),
    ]
    for S, gap in sets:
        for _ in range(50):
            p = S.project(rng.normal(scale=3, size=2))
            err = S.residual(p) if gap is None else gap(p)
            assert err <= 1e-10


# --- sphere and line ---------------------------------------------------------------


def test_sphere_line_step_examples():
    np.testing.assert_allclose(sphere_line_step([1, 0], 0), [1, 0])
    np.testing.assert_allclose(sphere_line_step([R2, R2], R2), [R2, R2], atol=1e-15)
    np.testing.assert_allclose(sphere_line_step([0.3, 0.4], R2), [0.6, R2 - 0.4], atol=1e-15)
    with pytest.raises(ValueError):
        sphere_line_step([0, 0], 0.5)


def test_sphere_line_higher_coordinates_shrink():
    x = np.array([0.3, 0.4, 1.2, 0.0])
    rho = np.linalg.norm(x)
    np.testing.assert_allclose(sphere_line_step(x, 0.2)[2:], (1 - 1 / rho) * x[2:])


@pytest.mark.parametrize("a", np.round(np.arange(0.05, 1.0, 0.05), 2))
@pytest.mark.parametrize("variant", ["halfline", "singleton", "doubleton"])
def test_two_cycle(a, variant):
    A = SphereSet.unit(2)
    B = {
        "halfline": HalfLine(a),
        "singleton": FinitePointSet([[a, 0]]),
        "doubleton": FinitePointSet([[a, 0], [-1, 0]]),
    }[variant]
    x0 = np.array([a / 2, math.sqrt(1 - a * a) / 2])
    x1 = dr_step(A, B, x0)
    np.testing.assert_allclose(x1, [a / 2, -math.sqrt(1 - a * a) / 2], atol=1e-12)
    assert np.linalg.norm(dr_step(A, B, x1) - x0) <= 1e-12


def _iterate(alpha, x0, n=10_000):
    return run(lambda x: sphere_line_step(x, alpha), x0, StopRule(max_iter=n))


def test_sphere_line_alpha_zero_limit():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x0 = np.concatenate([[rng.uniform(0.05, 3)], rng.normal(size=2)])
        tr = _iterate(0.0, x0)
        np.testing.assert_allclose(tr.last, [1, 0, 0], atol=1e-8)


def test_sphere_line_local_convergence():
    rng = np.random.default_rng(1)
    alpha = 0.6
    target = np.array([math.sqrt(1 - alpha**2), alpha])
    hits = 0
    for sign in (1, -1):
        feas = target * [sign, 1]
        for _ in range(10):
            tr = _iterate(alpha, feas + rng.uniform(-1e-2, 1e-2, 2))
            hits += np.linalg.norm(tr.last - feas) <= 1e-8
    assert hits == 20


def test_sphere_line_alpha_one_on_axis():
    tr = _iterate(1.0, [0.4, 0.3], n=200_000)
    assert abs(tr.last[0]) < 1e-2
    assert tr.last[1] > 1


def test_sphere_line_inconsistent_diverges():
    tr = _iterate(1.5, [0.2, 0.3])
    assert np.linalg.norm(tr.last) > 1e3


def test_sphere_line_global_region():
    eps = (1 - 2 ** (-1 / 3)) ** 1.5
    rng = np.random.default_rng(2)
    for _ in range(20):
        x0 = [rng.uniform(eps, 1), rng.uniform(0, 1)]
        tr = _iterate(R2, x0)
        np.testing.assert_allclose(tr.last, [R2, R2], atol=1e-8)


def test_sphere_line_matches_dr_on_sets():
    rng = np.random.default_rng(6)
    for alpha in (0.0, 0.3, R2, 1.0, 1.7):
        S = SphereSet.unit(4)
        L = AffineSubspace([0, alpha, 0, 0], [[1, 0, 0, 0]])
        for _ in range(10):
            x = rng.normal(size=4)
            np.testing.assert_allclose(dr_step(S, L, x), sphere_line_step(x, alpha), atol=1e-12)


def test_sphere_line_in_rotated_frame():
    # line through alpha*b along a, for an arbitrary orthonormal pair (a, b)
    rng = np.random.default_rng(7)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a, b, c = Q.T
    alpha = 0.45
    S = SphereSet.unit(3)
    L = AffineSubspace(alpha * b, [a])
    for _ in range(10):
        y = rng.normal(size=3)
        x = y[0] * a + y[1] * b + y[2] * c
        out = dr_step(S, L, x)
        np.testing.assert_allclose(Q.T @ out, sphere_line_step(y, alpha), atol=1e-12)


def test_permutation_and_basis_exhaustive_tiny():
    vals = [0, 0, 1]
    for x in itertools.product([-1.0, 0.0, 0.5, 2.0], repeat=3):
        p = PermutationSet(vals).project(x)
        q = BasisVectorSet(3).project(x)
        assert np.linalg.norm(p - x) == pytest.approx(np.linalg.norm(q - x))

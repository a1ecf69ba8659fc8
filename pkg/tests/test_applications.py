"""Regression, minimum enclosing ball, and maximum inscribed ball against
exact references (normal equations, Welzl, LP / analytic geometry)."""

import math

import numpy as np
import pytest
from scipy.optimize import linprog

from matgames.applications import (RegressionProblem, max_ib, min_eb,
                                   regression_solve, welzl_reference)
from matgames.errors import ConfigError, InputError
from matgames.sparse_matrix import build


def to_sparse(dense):
    m, n = dense.shape
    return build([(i, j, dense[i, j]) for i in range(m) for j in range(n)
                  if dense[i, j] != 0.0], m, n)


def chebyshev_center(Anorm, bvec):
    """LP inscribed-ball reference for unit-normal halfspaces a.x + b >= 0."""
    m, d = Anorm.shape
    res = linprog(c=[0.0] * d + [-1.0],
                  A_ub=np.hstack([-Anorm, np.ones((m, 1))]),
                  b_ub=bvec, bounds=[(None, None)] * d + [(0, None)])
    assert res.success
    return res.x[:d], res.x[d]


class TestRegression:
    def test_diagonal_system_recovers_solution(self):
        A = to_sparse(2.0 * np.eye(2))
        prob = RegressionProblem(A, np.array([2.0, 4.0]), mu=4.0, eps=1e-3)
        errs = []
        for s in range(5):
            x = regression_solve(prob, seed=s)
            errs.append(np.linalg.norm(x - np.array([1.0, 2.0])))
        assert np.mean(errs) <= 1.2e-3, errs

    def test_zero_rhs_returns_zero(self):
        rng = np.random.default_rng(0)
        d = rng.normal(size=(6, 3))
        prob = RegressionProblem(to_sparse(d), np.zeros(6),
                                 mu=float(np.linalg.eigvalsh(d.T @ d).min()),
                                 eps=1e-3)
        x = regression_solve(prob, seed=0)
        assert np.linalg.norm(x) <= 1e-3

    def test_random_system_matches_normal_equations(self):
        rng = np.random.default_rng(1)
        d = rng.normal(size=(12, 4))
        b = rng.normal(size=12)
        mu = float(np.linalg.eigvalsh(d.T @ d).min())
        xstar = np.linalg.solve(d.T @ d, d.T @ b)
        prob = RegressionProblem(to_sparse(d), b, mu=mu, eps=5e-3)
        errs = [np.linalg.norm(regression_solve(prob, seed=s) - xstar)
                for s in range(3)]
        assert np.mean(errs) <= 1.2 * 5e-3, errs
        # residual certificate
        x = regression_solve(prob, seed=0)
        assert (np.linalg.norm(d @ x - b)
                <= np.linalg.norm(d @ xstar - b)
                + np.linalg.norm(d, ord=2) * 5e-3 + 1e-12)

    def test_validation(self):
        A = to_sparse(np.eye(2))
        with pytest.raises(ConfigError):
            regression_solve(RegressionProblem(A, np.zeros(2), mu=0.0, eps=1e-3))
        with pytest.raises(InputError):
            regression_solve(RegressionProblem(A, np.zeros(3), mu=1.0, eps=1e-3))
        with pytest.raises(ConfigError):
            regression_solve(RegressionProblem(A, np.zeros(2), mu=1.0, eps=0.0))


class TestWelzl:
    def test_two_points(self):
        c, r = welzl_reference(np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert np.allclose(c, [0.5, 0.0]) and r == pytest.approx(0.5)

    def test_single_point(self):
        c, r = welzl_reference(np.array([[2.0, 3.0]]))
        assert np.allclose(c, [2.0, 3.0]) and r == 0.0

    def test_points_on_circle(self):
        ang = np.linspace(0, 2 * math.pi, 9)[:-1]
        pts = np.stack([np.cos(ang) * 2 + 1, np.sin(ang) * 2 - 3], axis=1)
        c, r = welzl_reference(pts, seed=3)
        assert np.allclose(c, [1.0, -3.0], atol=1e-9)
        assert r == pytest.approx(2.0, abs=1e-9)

    def test_matches_bruteforce_3d(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(9, 3))
        c, r = welzl_reference(pts, seed=0)
        assert np.max(np.linalg.norm(pts - c, axis=1)) <= r * (1 + 1e-9)
        # optimality: some support point is at distance r
        assert np.max(np.linalg.norm(pts - c, axis=1)) >= r * (1 - 1e-9)


class TestMinEb:
    def test_two_points(self):
        c, r = min_eb(np.array([[0.0, 0.0], [1.0, 0.0]]), eps=0.05)
        assert r == pytest.approx(0.5, rel=0.05)
        assert np.allclose(c, [0.5, 0.0], atol=0.05)

    def test_square(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
        c, r = min_eb(pts, eps=0.05)
        assert r == pytest.approx(math.sqrt(2.0), rel=0.05)
        assert np.allclose(c, [1.0, 1.0], atol=0.1)
        assert np.all(np.linalg.norm(pts - c, axis=1) <= r * (1 + 1e-9))

    def test_random_3d_within_eps_of_welzl(self):
        pts = np.random.default_rng(3).normal(size=(12, 3))
        c, r = min_eb(pts, eps=0.05, seed=0)
        cref, rref = welzl_reference(pts, seed=0)
        assert rref <= r <= (1 + 0.05) * rref
        assert np.all(np.linalg.norm(pts - c, axis=1) <= r * (1 + 1e-9))

    def test_identical_points_trivial(self):
        c, r = min_eb(np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]))
        assert r == 0.0 and np.allclose(c, [1.0, 2.0])

    def test_too_few_points(self):
        with pytest.raises(InputError):
            min_eb(np.array([[0.0, 0.0]]))

    def test_translation_and_scale_equivariance(self):
        # dyadic inputs and 8 points keep the internal normalization exact,
        # so the solve follows the identical sample path
        rng = np.random.default_rng(9)
        pts = np.round(rng.normal(size=(8, 2)) * 16) / 16
        c0, r0 = min_eb(pts, eps=0.1, seed=0)
        c1, r1 = min_eb(pts + np.array([1.25, -0.5]), eps=0.1, seed=0)
        assert np.allclose(c1 - np.array([1.25, -0.5]), c0, atol=1e-9)
        assert r1 == pytest.approx(r0, rel=1e-9)
        c2, r2 = min_eb(pts * 2.0, eps=0.1, seed=0)
        assert np.allclose(c2, 2.0 * c0, atol=1e-9)
        assert r2 == pytest.approx(2.0 * r0, rel=1e-9)


class TestMaxIb:
    def test_unit_square(self):
        Ah = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        bh = np.ones(4)
        c, r = max_ib(Ah, bh, eps=0.05, r_bound=2.0)
        assert r >= (1 - 0.05) * 1.0
        assert np.all(Ah @ c + bh >= r * (1 - 1e-9))

    def test_triangle_against_lp(self):
        # x >= 0, y >= 0, x + y <= 1 shifted so the origin is interior
        shift = np.array([0.25, 0.25])
        Ah = np.array([[1.0, 0.0], [0.0, 1.0],
                       [-1.0 / math.sqrt(2), -1.0 / math.sqrt(2)]])
        bh = np.array([shift[0], shift[1], (1.0 - shift.sum()) / math.sqrt(2)])
        c, r = max_ib(Ah, bh, eps=0.1)
        cref, rref = chebyshev_center(Ah, bh)
        assert r >= (1 - 0.1) * rref
        assert np.all(Ah @ c + bh >= r * (1 - 1e-9))

    def test_slab_with_bounding_box(self):
        # opposite halfspaces distance 1 apart plus a box to bound the domain
        Ah = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
        bh = np.array([0.4, 0.6, 3.0, 3.0])
        c, r = max_ib(Ah, bh, eps=0.1)
        assert r >= (1 - 0.1) * 0.5
        assert r <= 0.5 * (1 + 1e-6)

    def test_infeasible_origin_rejected(self):
        Ah = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        bh = np.array([-0.5, 1.0, 1.0, 1.0])  # origin violates the first
        with pytest.raises(InputError):
            max_ib(Ah, bh)

    def test_unbounded_detected(self):
        Ah = np.array([[1.0, 0.0], [0.0, 1.0]])  # open quadrant
        bh = np.ones(2)
        with pytest.raises(InputError):
            max_ib(Ah, bh)

    def test_zero_normal_rejected(self):
        with pytest.raises(InputError):
            max_ib(np.array([[0.0, 0.0], [1.0, 0.0]]), np.ones(2))

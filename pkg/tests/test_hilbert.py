"""Metric geometry and the certified SPD solve."""

import numpy as np
import pytest
import scipy.sparse as sp

from leapssn import Metric, cg_certified, solve_posdef


def _spd(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    return B @ B.T + n * np.eye(n)


def test_identity_metric_basics():
    m = Metric()
    x = np.array([1.0, 2.0])
    y = np.array([3.0, 4.0])
    assert m.kind == "identity"
    assert m.inner(x, y) == 11.0
    assert m.norm(x) == pytest.approx(np.sqrt(5.0))
    assert m.dual_norm(x) == pytest.approx(np.sqrt(5.0))
    assert np.array_equal(m.matvec(x), x)


def test_dense_metric_norms_against_direct_linear_algebra():
    R = np.array([[2.0, 0.5], [0.5, 1.0]])
    m = Metric(R)
    assert m.kind == "dense"
    x = np.array([1.0, -3.0])
    g = np.array([0.7, 0.2])
    assert m.inner(x, x) == pytest.approx(x @ R @ x)
    assert m.norm(x) == pytest.approx(np.sqrt(x @ R @ x))
    # dual norm is the R^{-1}-weighted norm
    assert m.dual_norm(g) == pytest.approx(np.sqrt(g @ np.linalg.solve(R, g)))
    assert np.allclose(m.solve(g), np.linalg.solve(R, g))


def test_sparse_and_dense_metrics_agree():
    n = 40
    R = _spd(n, seed=0)
    md = Metric(R)
    ms = Metric(sp.csr_matrix(R))
    g = np.random.default_rng(1).standard_normal(n)
    assert md.dual_norm(g) == pytest.approx(ms.dual_norm(g), rel=1e-10)
    assert np.allclose(md.solve(g), ms.solve(g), atol=1e-10)


def test_matvec_metric_agrees_with_dense():
    n = 25
    R = _spd(n, seed=2)
    md = Metric(R)
    mm = Metric(lambda v: R @ v, dim=n)
    assert mm.kind == "matvec"
    g = np.random.default_rng(3).standard_normal(n)
    assert mm.inner(g, g) == pytest.approx(md.inner(g, g), rel=1e-12)
    assert mm.dual_norm(g) == pytest.approx(md.dual_norm(g), rel=1e-8)


def test_solve_posdef_matches_numpy_on_spd():
    A = _spd(12, seed=4)
    b = np.arange(12, dtype=float)
    x = solve_posdef(A, b)
    assert x is not None
    assert np.allclose(A @ x, b, atol=1e-8)


def test_solve_posdef_rejects_indefinite_and_singular():
    assert solve_posdef(np.diag([1.0, -1.0]), np.ones(2)) is None
    assert solve_posdef(np.diag([1.0, 0.0]), np.ones(2)) is None


def test_solve_posdef_sparse_path():
    A = sp.csr_matrix(_spd(30, seed=5))
    b = np.ones(30)
    x = solve_posdef(A, b)
    assert x is not None
    assert np.allclose(A @ x, b, atol=1e-8)
    # sparse saddle matrix must be refused, not mis-solved
    S = sp.csr_matrix(np.diag([1.0, -2.0, 3.0]))
    assert solve_posdef(S, np.ones(3)) is None


def test_cg_certified_solves_and_certifies():
    A = _spd(15, seed=6)
    b = np.random.default_rng(7).standard_normal(15)
    x = cg_certified(lambda v: A @ v, b, tol=1e-12)
    assert np.linalg.norm(A @ x - b) <= 1e-9 * np.linalg.norm(b)


def test_cg_certified_refuses_indefinite_operator():
    D = np.diag([1.0, -1.0, 2.0])
    assert cg_certified(lambda v: D @ v, np.array([1.0, 1.0, 1.0])) is None


def test_cg_certified_zero_rhs():
    A = _spd(4, seed=8)
    x = cg_certified(lambda v: A @ v, np.zeros(4))
    assert np.array_equal(x, np.zeros(4))

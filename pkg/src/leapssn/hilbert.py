"""Hilbert-space plumbing: metrics, dual norms, and certified SPD solves.

Vectors are dense numpy arrays and the duality pairing is the plain dot
product.  A problem's inner product ``<x, y>_R = <Rx, y>`` is carried by a
:class:`Metric`, which owns the Riesz solves ``R^{-1} g`` behind dual norms.

Solve strategy: dense Cholesky up to ``DENSE_LIMIT`` unknowns (the failed
factorization doubles as the positive-definiteness certificate), sparse LU
for larger operators that are declared positive semidefinite by the caller,
and a plain conjugate-gradient loop with an indefiniteness certificate for
implicit operators.  Solutions are certified by a relative residual check;
an uncertifiable trial solve returns ``None`` so the caller can treat the
step as non-computable, while a broken *metric* raises
:class:`NumericalError` (the metric is part of the problem contract and must
be SPD).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_LIMIT = 2000
CG_TOL = 1e-12
RESIDUAL_TOL = 1e-6


class NumericalError(RuntimeError):
    """A linear solve could not be certified.

    Carries the relative residual (when one was computed) so callers can
    report how badly the certification failed.
    """

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (relative residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


def _is_sparse(A):
    return sp.issparse(A)


def _sym_dense(A):
    # symmetrize against roundoff before factorizing
    return 0.5 * (A + A.T)


def cg_certified(matvec, b, tol=CG_TOL, maxiter=None):
    """Conjugate gradients with an indefiniteness certificate.

    Returns the solution of ``A x = b`` for symmetric positive definite
    ``A`` given by ``matvec``, or ``None`` when a direction with
    ``<Ap, p> <= 0`` is encountered (the operator is not positive definite)
    or the iteration fails to reach the relative tolerance.
    """
    n = b.shape[0]
    if maxiter is None:
        maxiter = max(200, 10 * n)
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x
    p = r.copy()
    rs = float(r @ r)
    for _ in range(maxiter):
        Ap = matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            return None
        a = rs / pAp
        x += a * p
        r -= a * Ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= tol * bnorm:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    return None


def solve_posdef(M, rhs, *, psd_hint=False):
    """Solve ``M x = rhs`` for symmetric positive definite ``M``.

    Returns ``None`` when ``M`` is (numerically) not positive definite or the
    solution cannot be certified -- callers treat that as a non-computable
    step.  ``psd_hint`` asserts that the caller knows ``M`` is positive
    semidefinite, which licenses the sparse LU path.
    """
    if callable(M) and not (_is_sparse(M) or isinstance(M, np.ndarray)):
        return cg_certified(M, rhs)
    if _is_sparse(M):
        n = M.shape[0]
        if n <= DENSE_LIMIT:
            return _dense_chol_solve(M.toarray(), rhs)
        if not psd_hint:
            return cg_certified(lambda v: M @ v, rhs)
        try:
            with np.errstate(all="ignore"):
                lu = spla.splu(M.tocsc())
                x = lu.solve(rhs)
        except Exception:
            return None
        if not np.all(np.isfinite(x)):
            return None
        res = np.linalg.norm(M @ x - rhs) / max(1e-300, np.linalg.norm(rhs))
        if res > RESIDUAL_TOL:
            return None
        return x
    return _dense_chol_solve(np.asarray(M, dtype=float), rhs)


def _dense_chol_solve(M, rhs):
    try:
        c, low = sla.cho_factor(_sym_dense(M), check_finite=False)
    except (sla.LinAlgError, ValueError):
        return None
    x = sla.cho_solve((c, low), rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        return None
    return x


class Metric:
    """SPD operator R defining ``<x, y>_R`` and the dual norm.

    ``R`` may be ``None`` (identity), a dense ndarray, a scipy sparse matrix,
    or a callable matvec.  Factorizations are cached -- a metric is built once
    per problem and queried a couple of times per trial step.
    """

    def __init__(self, R=None, dim=None):
        self.R = R
        self.dim = dim
        self._chol = None
        self._lu = None
        if R is None:
            self.kind = "identity"
        elif callable(R) and not (_is_sparse(R) or isinstance(R, np.ndarray)):
            self.kind = "matvec"
        elif _is_sparse(R):
            n = R.shape[0]
            self.dim = n
            if n <= DENSE_LIMIT:
                self.kind = "dense"
                self.R = R.toarray()
            else:
                self.kind = "sparse"
        else:
            self.R = np.asarray(R, dtype=float)
            self.dim = self.R.shape[0]
            self.kind = "dense"

    # -- products ----------------------------------------------------------

    def matvec(self, x):
        if self.kind == "identity":
            return x
        if self.kind == "matvec":
            return self.R(x)
        return self.R @ x

    def inner(self, x, y):
        return float(self.matvec(x) @ y)

    def norm(self, x):
        return float(np.sqrt(max(0.0, self.inner(x, x))))

    # -- Riesz solves -------------------------------------------------------

    def solve(self, g):
        """R^{-1} g with a cached factorization; raises on a broken metric."""
        if self.kind == "identity":
            return g
        if self.kind == "matvec":
            x = cg_certified(self.R, g)
            if x is None:
                raise NumericalError("metric operator is not SPD or CG failed")
            return x
        if self.kind == "dense":
            if self._chol is None:
                try:
                    self._chol = sla.cho_factor(_sym_dense(self.R), check_finite=False)
                except (sla.LinAlgError, ValueError) as e:
                    raise NumericalError("metric is not positive definite") from e
            return sla.cho_solve(self._chol, g, check_finite=False)
        if self._lu is None:
            try:
                with np.errstate(all="ignore"):
                    self._lu = spla.splu(self.R.tocsc())
            except Exception as e:
                raise NumericalError("metric factorization failed") from e
        x = self._lu.solve(g)
        res = np.linalg.norm(self.R @ x - g) / max(1e-300, np.linalg.norm(g))
        if not np.all(np.isfinite(x)) or res > RESIDUAL_TOL:
            raise NumericalError("metric solve failed certification", residual=res)
        return x

    def dual_norm(self, g):
        """``sqrt(<g, R^{-1} g>)`` -- the norm in which tolerances are stated."""
        return float(np.sqrt(max(0.0, float(g @ self.solve(g)))))

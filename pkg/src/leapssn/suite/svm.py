"""L2-regularised squared-hinge SVM as a smooth composite problem.

f(w, b) = 0.5 ||w||^2 + gamma * sum_i max(0, 1 - y_i (w.x_i + b))^2

The squared hinge is C^1 with a piecewise-linear gradient, so the
natural Newton derivative is the active-sample Gauss-Newton matrix.
The intercept is unregularised, matching the usual L2-SVM convention.
"""

from __future__ import annotations

import numpy as np

from ..problem import Problem
from .rng import SplitMix64


def svm_data(n_samples: int, n_features: int, seed: int, separation: float = 3.0):
    """Two seeded Gaussian clouds at +/- separation/2 along the diagonal.

    Returns (X, y) with y in {+1.0, -1.0}.  The shift is scaled by
    1/sqrt(n_features) so the class distance is independent of dimension.
    """
    rng = SplitMix64(seed)
    y = rng.signs(n_samples)
    shift = 0.5 * separation / np.sqrt(n_features)
    X = rng.normals(n_samples * n_features).reshape(n_samples, n_features)
    X += np.outer(y, np.full(n_features, shift))
    return X, y


def svm_problem(X: np.ndarray, y: np.ndarray, gamma: float) -> Problem:
    """Build the squared-hinge problem over v = (w, b)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (l, n) with matching labels")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    l, n = X.shape
    Z = np.hstack([X, np.ones((l, 1))])
    dim = n + 1

    def margins(v):
        return 1.0 - y * (Z @ v)

    def f_value(v):
        m = np.maximum(0.0, margins(v))
        return 0.5 * float(v[:n] @ v[:n]) + gamma * float(m @ m)

    def f_grad(v):
        m = margins(v)
        act = m > 0
        g = v.copy()
        g[n] = 0.0
        g -= 2.0 * gamma * (Z[act].T @ (m[act] * y[act]))
        return g

    def hess(v):
        act = margins(v) > 0
        Za = Z[act]
        H = np.zeros((dim, dim))
        H[:n, :n] = np.eye(n)
        H += 2.0 * gamma * (Za.T @ Za)
        return H

    def f_decrease(v, vp):
        # margins move linearly, so both hinge vectors share one matvec
        d = vp - v
        m = margins(v)
        mp = m - y * (Z @ d)
        a = np.maximum(0.0, m)
        b = np.maximum(0.0, mp)
        quad = -float(d[:n] @ v[:n]) - 0.5 * float(d[:n] @ d[:n])
        return quad + gamma * float(((a - b) * (a + b)).sum())

    def near_kink(rng: SplitMix64) -> np.ndarray:
        v = rng.normals(dim) / np.sqrt(dim)
        m0 = 1.0 - y[0] * (Z[0] @ v)
        v[n] += (m0 - 1e-9) * y[0]  # place sample 0 on the hinge edge
        return v

    return Problem(
        dim=dim,
        f_value=f_value,
        f_grad=f_grad,
        hess=hess,
        f_decrease=f_decrease,
        hess_psd=True,
        name="svm",
        x0=np.full(dim, 0.5),
        lambda0=3.0 * gamma * float(np.sqrt((X * X).sum())),
        curvature_bound=2.0 * gamma * float((Z * Z).sum()),
        sample_box=(np.full(dim, -2.0), np.full(dim, 2.0)),
        near_kink=near_kink,
    )


def write_svm_data(path, X, y) -> None:
    """One sample per line: integer label, then the features."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    with open(path, "w") as fh:
        for i in range(X.shape[0]):
            feats = " ".join(repr(float(v)) for v in X[i])
            fh.write(f"{int(y[i]):+d} {feats}\n")


def read_svm_data(path):
    """Inverse of :func:`write_svm_data`; returns (X, y)."""
    rows = []
    labels = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            labels.append(float(int(parts[0])))
            rows.append([float(tok) for tok in parts[1:]])
    X = np.array(rows, dtype=float)
    y = np.array(labels, dtype=float)
    if X.size and any(len(r) != X.shape[1] for r in rows):
        raise ValueError("inconsistent feature counts")
    return X, y


class L2MarginClassifier:
    """Binary classifier wrapping the squared-hinge solver.

    Parameters mirror the problem builder; after ``fit`` the learned
    hyperplane is available as ``coef_`` and ``intercept_`` and the full
    solver result as ``result_``.
    """

    def __init__(self, gamma: float = 1.0, tol: float = 1e-6, max_solves: int = 200):
        self.gamma = gamma
        self.tol = tol
        self.max_solves = max_solves

    def get_params(self, deep: bool = True):
        return {"gamma": self.gamma, "tol": self.tol, "max_solves": self.max_solves}

    def set_params(self, **params):
        for key, val in params.items():
            if key not in ("gamma", "tol", "max_solves"):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, val)
        return self

    def fit(self, X, y):
        from ..driver import leap_ssn

        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        classes = np.unique(y)
        if classes.size != 2:
            raise ValueError("need exactly two classes")
        self.classes_ = classes
        yy = np.where(y == classes[1], 1.0, -1.0)
        prob = svm_problem(X, yy, self.gamma)
        res = leap_ssn(prob, grad_tol=self.tol, max_solves=self.max_solves)
        self.result_ = res
        self.coef_ = res.x[:-1].copy()
        self.intercept_ = float(res.x[-1])
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        d = self.decision_function(X)
        return np.where(d >= 0.0, self.classes_[1], self.classes_[0])

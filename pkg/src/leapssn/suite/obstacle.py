"""Obstacle problems: penalised membrane and bending-plate contact.

Both minimise an elliptic quadratic energy plus a one-sided quadratic
penalty that activates where the surface dips below an obstacle:

    f(u) = 0.5 <Au, u> - <b, u> + (c/2) sum_i max(0, phi_i - u_i)^2

with c = gamma * h^2.  The generalized second derivative is
``A + c * diag(chi)`` with the active set ``chi = [phi - u >= 0]``
(boundary case included).

The *membrane* uses the Dirichlet 5-point Laplacian on the interior nodes
of the unit square and the energy metric R = A.  Its clamped systems are
irreducibly diagonally dominant M-matrices for every gamma, so undamped
Newton is unconditionally safe on it -- useful as a well-behaved instance,
useless for stressing solvers.

The *plate* uses the fourth-order bending energy of a freely resting
plate (no kinematic boundary conditions; rigid motions {1, x, y} span the
kernel of A) pressed onto a narrow stepped punch.  At large gamma the
contact set collapses onto the punch plateau, a single grid column, and
the clamped system turns exactly singular: the cross-tilt rigid motion
vanishes on the active column.  Undamped Newton dies there while
regularised methods keep working, which is the failure pattern this
instance exists to exhibit.  Metric R = A + h^2 I (SPD on the rigid
modes).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..hilbert import Metric
from ..problem import Problem
from .rng import SplitMix64


def _grid_field(value, X, Y, default):
    """Resolve a scalar / array / callable(X, Y) field on a grid."""
    if value is None:
        value = default
    if callable(value):
        out = np.asarray(value(X, Y), dtype=float)
    elif np.isscalar(value):
        out = np.full(X.shape, float(value))
    else:
        out = np.asarray(value, dtype=float).reshape(X.shape)
    return out.ravel()


def _penalised_quadratic(A, b, c, phi, name, metric, dim, **extra):
    """Assemble the Problem for f = 0.5<Au,u> - <b,u> + c/2 ||max(0,phi-u)||^2."""

    def f_value(u):
        m = np.maximum(0.0, phi - u)
        return 0.5 * float(u @ (A @ u)) - float(b @ u) + 0.5 * c * float(m @ m)

    def f_grad(u):
        return A @ u - b - c * np.maximum(0.0, phi - u)

    def hess(u):
        chi = ((phi - u) >= 0.0).astype(float)
        return (A + c * sp.diags(chi)).tocsr()

    def f_decrease(u, up):
        # f(u) - f(up) without forming the two near-equal totals
        d = up - u
        s = phi - u
        m = np.maximum(0.0, s)
        mh = np.maximum(0.0, s - d)
        return (-float(d @ (A @ u)) - 0.5 * float(d @ (A @ d)) + float(b @ d)
                + 0.5 * c * float(((m - mh) * (m + mh)).sum()))

    def near_kink(rng: SplitMix64) -> np.ndarray:
        return phi + 1e-9 * rng.normals(dim)

    prob = Problem(
        dim=dim,
        f_value=f_value,
        f_grad=f_grad,
        hess=hess,
        metric=metric,
        f_decrease=f_decrease,
        hess_psd=True,
        name=name,
        x0=np.zeros(dim),
        sample_box=(phi - 0.5, phi + 0.5),
        near_kink=near_kink,
        **extra,
    )
    prob.obstacle = phi       # contact diagnostics: violation = max(0, phi - u)
    return prob


def laplacian_2d(m: int) -> sp.csr_matrix:
    """Dirichlet 5-point Laplacian stencil (4 / -1) on an m x m grid."""
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m))
    eye = sp.identity(m)
    return (sp.kron(eye, T) + sp.kron(T, eye)).tocsr()


def membrane_problem(n: int = 65, gamma: float = 1e4,
                     obstacle=None, load=None) -> Problem:
    """Penalised membrane contact on the interior (n-2)^2 grid.

    ``obstacle`` and ``load`` may be scalars, callables of the node
    coordinates, or flat arrays.  Defaults: a paraboloid bump peaking at
    0.25 in the centre, and a uniform downward load of -10.  gamma = 0 is
    allowed and reduces the problem to the linear Poisson equation.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    m = n - 2
    h = 1.0 / (n - 1)
    xs = np.arange(1, n - 1) * h
    X, Y = np.meshgrid(xs, xs, indexing="ij")

    phi = _grid_field(obstacle, X, Y,
                      lambda X, Y: 0.25 - ((X - 0.5) ** 2 + (Y - 0.5) ** 2))
    g_load = _grid_field(load, X, Y, -10.0)

    A = laplacian_2d(m)
    b = (h * h) * g_load
    c = gamma * h * h
    lam_min = 8.0 * np.sin(0.5 * np.pi * h) ** 2   # smallest stencil eigenvalue

    return _penalised_quadratic(
        A, b, c, phi, "membrane", Metric(A), m * m,
        strong_convexity=1.0,                       # R = A: energy norm
        curvature_bound=(c / lam_min if c > 0 else 0.0),
    )


def plate_bending_operator(n: int, h: float) -> sp.csr_matrix:
    """A = h^2 (Dxx'Dxx + 2 Dxy'Dxy + Dyy'Dyy) on the full n x n grid.

    Free-boundary second differences; the kernel is exactly the rigid
    motions span{1, x, y}.
    """
    eye = sp.identity(n)
    S = sp.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(n - 2, n)) / (h * h)
    P = sp.diags([-1.0, 1.0], [0, 1], shape=(n - 1, n)) / h
    Dxx = sp.kron(S, eye)
    Dyy = sp.kron(eye, S)
    Dxy = sp.kron(P, P)
    A = (h * h) * (Dxx.T @ Dxx + 2.0 * (Dxy.T @ Dxy) + Dyy.T @ Dyy)
    return A.tocsr()


def punch_obstacle(n: int, offset: float = 0.06, top: float = 0.30,
                   floor: float = -0.5) -> np.ndarray:
    """Stepped punch: one plateau column at ``top`` flanked by two terrace
    columns ``offset`` lower, everything else at ``floor``.

    The plateau sits just off-centre so the punch column never aligns with
    a symmetry axis of the grid.
    """
    ic = int(round((n - 1) * 17 / 32))
    phi = np.full((n, n), float(floor))
    phi[ic - 1, :] = top - offset
    phi[ic + 1, :] = top - offset
    phi[ic, :] = top
    return phi.ravel()


def plate_problem(n: int = 65, gamma: float = 1e4,
                  obstacle=None, load=None) -> Problem:
    """Freely resting plate pressed onto a stepped punch.

    Small gamma lets the plate penetrate down to the terraces and floor
    (wide, well-spread contact set); large gamma confines contact to the
    plateau column, whose clamped system loses the cross-tilt rigid mode
    and becomes singular.
    """
    if n < 5:
        raise ValueError("n must be at least 5")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    h = 1.0 / (n - 1)
    xs = np.arange(n) * h
    X, Y = np.meshgrid(xs, xs, indexing="ij")

    if obstacle is None:
        phi = punch_obstacle(n)
    else:
        phi = _grid_field(obstacle, X, Y, None)
    g_load = _grid_field(load, X, Y, -12.0)

    A = plate_bending_operator(n, h)
    R = (A + (h * h) * sp.identity(n * n)).tocsr()
    b = (h * h) * g_load
    c = gamma * h * h

    return _penalised_quadratic(
        A, b, c, phi, "plate", Metric(R), n * n,
        curvature_bound=(gamma if gamma > 0 else 0.0),  # c/lambda_min(R) <= gamma
    )

"""Trial-step subproblems.

Each outer trial minimises the regularised local model

    m(y) = f(x) + <f'(x), y-x> + 1/2 <H(x)(y-x), y-x>
           + lambda/2 ||y-x||_R^2 + psi(y).

For smooth problems (``psi == 0``) the minimiser solves the SPD system
``(H + lambda R) d = -f'(x)`` directly; for composite problems the model is
minimised by a monotone accelerated proximal-gradient loop whose final
iterate is produced by one extra prox step, so that the prox fixed-point
identity hands back an exact subgradient of ``psi`` at the returned point.

A step is *non-computable* when the system is not positive definite (the
model has no minimiser for this lambda) or the inner iteration fails to
certify; the driver reacts by doubling lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hilbert import solve_posdef
from .problem import Problem

INNER_TOL = 1e-10
INNER_REL = 1e-4     # residual reduction relative to the base point's own
INNER_MAXIT = 10000
POWER_ITERS = 30


@dataclass
class SubproblemResult:
    x_plus: Optional[np.ndarray]
    computable: bool
    linear_solves: int = 1
    psi_grad: Optional[np.ndarray] = None    # exact subgradient of psi at x_plus
    psi_value: Optional[float] = None
    stationarity: float = 0.0                # model-gradient residual at x_plus
    diagnostics: dict = field(default_factory=dict)


def _add_reg(H, lam, metric, dim):
    """Assemble H + lambda*R in a type matching H."""
    import scipy.sparse as sp

    if callable(H) and not (sp.issparse(H) or isinstance(H, np.ndarray)):
        if metric.kind == "identity":
            return lambda v: H(v) + lam * v
        return lambda v: H(v) + lam * metric.matvec(v)
    if sp.issparse(H):
        if metric.kind == "identity":
            return (H + lam * sp.identity(dim, format="csr")).tocsr()
        return (H + lam * sp.csr_matrix(metric.R)).tocsr()
    M = np.array(H, dtype=float, copy=True)
    if metric.kind == "identity":
        M[np.diag_indices_from(M)] += lam
        return M
    return M + lam * np.asarray(metric.R)


def smooth_step(problem: Problem, x, grad, H, lam) -> SubproblemResult:
    """Minimise the model for a smooth problem: one certified SPD solve."""
    if not problem.smooth:
        raise ValueError("smooth_step requires psi == 0")
    M = _add_reg(H, lam, problem.metric, problem.dim)
    d = solve_posdef(M, -grad, psd_hint=problem.hess_psd)
    if d is None:
        return SubproblemResult(None, False)
    x_plus = x + d
    return SubproblemResult(x_plus, True, linear_solves=1)


def _power_norm(H, dim):
    """Deterministic power-iteration estimate of ||H||_2."""
    v = np.ones(dim) / np.sqrt(dim)
    v[0] += 0.5 / np.sqrt(dim)  # break symmetry for checkerboard-null operators
    v /= np.linalg.norm(v)
    matvec = H if callable(H) and not isinstance(H, np.ndarray) else (lambda u: H @ u)
    est = 0.0
    for _ in range(POWER_ITERS):
        w = matvec(v)
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
    return est


def composite_step(problem: Problem, x, grad, H, lam,
                   inner_tol=INNER_TOL, maxit=INNER_MAXIT) -> SubproblemResult:
    """Minimise the composite model with a monotone accelerated prox loop.

    Termination is by the prox fixed-point residual; the returned point is
    always the output of a prox step from the last smooth iterate, so
    ``(v - x_plus)/t`` is an exact element of ``partial psi(x_plus)``.
    Counts as one trial solve in the driver's accounting.
    """
    prox = problem.prox if not problem.smooth else (lambda v, t: v)
    matvec = H if callable(H) and not isinstance(H, np.ndarray) else (lambda u: H @ u)

    Hnorm = _power_norm(H, problem.dim)
    t = 1.0 / (1.1 * Hnorm + lam)

    def model_grad(y):
        d = y - x
        return grad + matvec(d) + lam * d

    def model_smooth(y):
        d = y - x
        return float(grad @ d) + 0.5 * float(d @ matvec(d)) + 0.5 * lam * float(d @ d)

    def model_total(y):
        return model_smooth(y) + problem.psi(y)

    y = x.copy()
    z = x.copy()          # momentum point
    m_best = model_total(y)
    theta = 1.0
    res_scale = max(1.0, float(np.linalg.norm(x)))
    threshold = inner_tol * res_scale
    converged = False
    it = 0
    for it in range(maxit):
        g_z = model_grad(z)
        cand = prox(z - t * g_z, t)
        m_cand = model_total(cand)
        if it == 0:
            # near outer convergence the absolute threshold can exceed the
            # step itself; demand a fixed reduction of the base point's own
            # prox residual too (floored at attainable rounding accuracy)
            res0 = float(np.linalg.norm(x - cand)) / t
            floor = 4.0 * np.finfo(float).eps * res_scale / t
            threshold = min(threshold, max(INNER_REL * res0, floor))
        # monotone safeguard with a rounding-noise dead band: near the model
        # optimum measured values differ by ulps in either direction, and a
        # hard comparison would reject every candidate and freeze the loop
        tau = 16.0 * np.finfo(float).eps * max(1.0, abs(m_best))
        if m_cand > m_best + tau:  # material increase: restart from best point
            z = y.copy()
            theta = 1.0
            g_z = model_grad(z)
            cand = prox(z - t * g_z, t)
            m_cand = model_total(cand)
            if m_cand > m_best + tau:   # no progress even from the best point
                cand, m_cand = y, m_best
        theta_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
        z = cand + ((theta - 1.0) / theta_next) * (cand - y)
        y, m_best, theta = cand, min(m_best, m_cand), theta_next
        # prox fixed-point residual at y decides termination
        p = prox(y - t * model_grad(y), t)
        res = float(np.linalg.norm(y - p)) / t
        if res <= threshold:
            converged = True
            break
    if not converged:
        return SubproblemResult(None, False, diagnostics={"inner_iters": maxit})

    # certification: one clean prox step from y, so the fixed-point identity
    # hands back an exact subgradient of psi at the returned point
    g_y = model_grad(y)
    v = y - t * g_y
    x_plus = prox(v, t)
    psi_grad = (v - x_plus) / t
    psi_val = problem.psi(x_plus)
    stat = float(np.linalg.norm(model_grad(x_plus) + psi_grad))
    return SubproblemResult(x_plus, True, linear_solves=1,
                            psi_grad=psi_grad, psi_value=psi_val,
                            stationarity=stat,
                            diagnostics={"inner_iters": it + 1, "step": t})

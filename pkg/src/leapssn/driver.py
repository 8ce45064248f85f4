"""Adaptive proximal Levenberg-Marquardt / semismooth Newton driver.

Each outer iteration fixes the current point ``x_k``, caches ``f(x_k)``,
``f'(x_k)`` and ``H(x_k)``, and walks a trial ladder ``lambda = 2^j *
Lambda_k`` (``j = 0, 1, ...``, exact in binary floating point).  For every
trial the regularised model subproblem is solved; a non-computable step
(indefinite system, failed inner loop) moves to the next rung.  A computable
candidate ``x_plus`` with certified composite gradient ``F'(x_plus)`` is
accepted iff both

    <F'(x_plus), x_k - x_plus>  >=  (alpha/lambda) ||F'(x_plus)||_*^2
    F(x_k) - F(x_plus)          >=  beta * lambda * ||x_plus - x_k||_R^2

hold (non-strict).  On acceptance the next iteration starts its ladder at
``Lambda_{k+1} = lambda_k / 2``, so the regularisation can decrease
geometrically on quadratic-like stretches while rejected rungs push it back
up.  The objective decrease in the second test is evaluated through
``Problem.decrease`` which prefers a difference-form computation: near tight
tolerances the subtraction of two O(1) objective values is pure rounding
noise while the true decrease still dominates the threshold.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problem import Problem
from .subsolver import smooth_step, composite_step

CONVERGED = "converged"
OUTER_BUDGET = "outer_budget"
INNER_BUDGET = "inner_budget"
SOLVE_BUDGET = "solve_budget"
SUBPROBLEM_FAILURE = "subproblem_failure"

#: CLI / script exit codes per terminal status.
EXIT_CODES = {
    CONVERGED: 0,
    OUTER_BUDGET: 2,
    INNER_BUDGET: 2,
    SOLVE_BUDGET: 2,
    SUBPROBLEM_FAILURE: 3,
}

TRACE_HEADER = "k,j_k,lambda_k,Lambda_k,F,grad_dual_norm,step_norm,cum_linear_solves"


@dataclass
class Record:
    """One accepted outer iteration."""
    k: int
    j: int
    lam: float          # accepted lambda_k = 2^j * Lambda_k
    Lam: float          # ladder base Lambda_k at the start of the iteration
    F: float            # F(x_{k+1})
    grad_dual_norm: float
    step_norm: float
    cum_solves: int


@dataclass
class Trace:
    """Run history: scalar records plus the iterates the audit needs."""
    x0: np.ndarray
    F0: float
    g0_norm: float
    config: dict
    records: list = field(default_factory=list)
    iterates: list = field(default_factory=list)   # x_{k+1} per record
    grads: list = field(default_factory=list)      # certified F'(x_{k+1})
    status: str = ""

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.csv())

    def csv(self) -> str:
        out = io.StringIO()
        out.write(TRACE_HEADER + "\n")
        for r in self.records:
            out.write(f"{r.k},{r.j},{repr(r.lam)},{repr(r.Lam)},{repr(r.F)},"
                      f"{repr(r.grad_dual_norm)},{repr(r.step_norm)},{r.cum_solves}\n")
        return out.getvalue()


@dataclass
class Result:
    x: np.ndarray
    status: str
    F: float
    grad_dual_norm: float
    iterations: int
    solves: int
    trace: Trace

    @property
    def converged(self):
        return self.status == CONVERGED

    @property
    def exit_code(self):
        return EXIT_CODES[self.status]


def _validate(alpha, beta, m, lambda0, max_inner_trials):
    if not (0.0 < alpha <= 0.5):
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    if m < 1.0:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (0.0 < beta <= (m - 1.0) / (2.0 * m)):
        raise ValueError(f"beta must lie in (0, (m-1)/(2m)] = (0, {(m-1)/(2*m)}], got {beta}")
    if lambda0 <= 0.0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    if max_inner_trials < 1:
        raise ValueError("max_inner_trials must be >= 1")


def _initial_stationarity(problem, x, g):
    """Dual-norm stationarity measure at the start point.

    For smooth problems this is ||f'(x0)||_*; for composite problems the
    unit-step prox-gradient residual (a standard stationarity surrogate --
    the certified quantity used for convergence tests lives on accepted
    iterates, never on x0).
    """
    if problem.smooth:
        return problem.metric.dual_norm(g)
    return float(np.linalg.norm(x - problem.prox(x - g, 1.0)))


def leap_ssn(problem: Problem, x0=None, *, grad_tol=1e-8, max_outer=500,
             max_solves=None, max_inner_trials=60, alpha=0.5, beta=0.25,
             m=2.0, lambda0=None, callback=None) -> Result:
    """Run the adaptive solver on ``problem`` from ``x0``.

    Returns a :class:`Result`; ``result.trace`` always holds at least one
    record unless a budget expires before the first acceptance.  Convergence
    is declared when the certified gradient at an *accepted* iterate has dual
    norm at most ``grad_tol`` (the start point is never tested, so a trace is
    never empty on the converged path).
    """
    Lam = lambda0 if lambda0 is not None else (problem.lambda0 or 1.0)
    _validate(alpha, beta, m, Lam, max_inner_trials)

    x = problem.start_point(x0)
    fx = float(problem.f_value(x))
    psix = problem.psi(x)
    F = fx + psix
    g = np.asarray(problem.f_grad(x), dtype=float)
    g0_norm = _initial_stationarity(problem, x, g)

    config = {
        "problem": problem.name, "dim": problem.dim, "alpha": alpha,
        "beta": beta, "m": m, "lambda0": Lam, "grad_tol": grad_tol,
        "max_outer": max_outer, "max_solves": max_solves,
        "max_inner_trials": max_inner_trials,
    }
    trace = Trace(x0=x.copy(), F0=F, g0_norm=g0_norm, config=config)
    solves = 0
    status = OUTER_BUDGET
    last_gpn = g0_norm

    for k in range(max_outer):
        if k > 0:
            g = np.asarray(problem.f_grad(x), dtype=float)
        H = problem.hess(x)

        accepted = False
        computable_seen = False
        for j in range(max_inner_trials):
            if max_solves is not None and solves >= max_solves:
                status = SOLVE_BUDGET
                break
            lam = (2.0 ** j) * Lam
            if problem.smooth:
                sub = smooth_step(problem, x, g, H, lam)
            else:
                sub = composite_step(problem, x, g, H, lam)
            solves += sub.linear_solves
            if not sub.computable:
                continue
            computable_seen = True
            x_plus = sub.x_plus
            d = x_plus - x

            if problem.smooth:
                g_plus = np.asarray(problem.f_grad(x_plus), dtype=float)
                psi_xp = 0.0
            else:
                g_plus = np.asarray(problem.f_grad(x_plus), dtype=float) + sub.psi_grad
                psi_xp = sub.psi_value

            gpn2 = float(g_plus @ problem.metric.solve(g_plus))
            gpn = float(np.sqrt(max(0.0, gpn2)))
            dec = problem.decrease(x, x_plus, psi_x=psix, psi_xp=psi_xp)
            step2 = problem.metric.inner(d, d)

            cond1 = float(g_plus @ (-d)) >= (alpha / lam) * gpn2
            cond2 = dec >= beta * lam * step2
            if cond1 and cond2:
                accepted = True
                break

        if status == SOLVE_BUDGET:
            break
        if not accepted:
            status = INNER_BUDGET if computable_seen else SUBPROBLEM_FAILURE
            break

        x = x_plus
        F = F - dec
        psix = psi_xp
        last_gpn = gpn
        trace.records.append(Record(k=k, j=j, lam=lam, Lam=Lam, F=F,
                                    grad_dual_norm=gpn,
                                    step_norm=float(np.sqrt(max(0.0, step2))),
                                    cum_solves=solves))
        trace.iterates.append(x.copy())
        trace.grads.append(g_plus.copy())
        Lam = lam / 2.0
        if callback is not None:
            callback(k, x, gpn)
        if gpn <= grad_tol:
            status = CONVERGED
            break

    trace.status = status
    return Result(x=x, status=status, F=F, grad_dual_norm=last_gpn,
                  iterations=len(trace.records), solves=solves, trace=trace)

"""Theory-audit harness for solver traces and problem definitions.

Three layers:

* derivative/structure oracles — ``grad_check`` (finite differences),
  ``hess_symmetry_check``, and ``assumption2_sample`` which estimates the
  model-error constant L of the regularised Newton model by sampling
  ``||f'(y) - f'(x) - H(x)(y-x)||_* / ||y-x||`` over random, near-kink,
  and caller-supplied point pairs;

* trace audits — ``audit_trace`` re-derives every promise the adaptive
  driver makes (monotone objective, both acceptance inequalities, the
  regulariser ceiling, the backtracking-count identity, and the global
  rate envelopes that apply given the problem's declared constants),
  ``superlinear_check`` and ``dm_condition_sample`` detect the fast
  local regime, ``manifold_check`` the finite identification of the
  nonsmooth manifold;

* step-map bounds — ``step_length_bound``, ``step_shift_bound`` and
  ``step_alignment_bound`` evaluate the three a-priori inequalities the
  regularised proximal step satisfies (step length vs subgradient norm,
  lambda-sensitivity, and the alignment lower bound that motivates the
  first acceptance test) as (lhs, rhs) pairs for property tests.

Every envelope check is one-sided: the harness asserts trace <= bound,
never tightness.  Sampled constants may undershoot the truth, so all
theory bounds inflate the constant by 5% and carry a 1e-8 relative
arithmetic slack; checks whose required constants are missing are
reported as not-applicable (None), never silently passed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .driver import Trace
from .problem import Problem
from .subsolver import composite_step, smooth_step
from .suite.rng import SplitMix64

SLACK = 1e-8        # relative arithmetic slack on audited inequalities
L_INFLATION = 1.05  # sampled model-error constants may undershoot the truth
GRAD_STEP = 1e-6    # central-difference base step
MAX_COORD_DIM = 200  # coordinate-wise differences up to here, directions beyond


def _apply_H(H, v):
    if callable(H):
        return np.asarray(H(v), dtype=float)
    return np.asarray(H @ v, dtype=float)


def _sample_bounds(problem: Problem, radius: float):
    if problem.sample_box is not None:
        lo, hi = problem.sample_box
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    lo = np.full(problem.dim, -radius)
    return lo, -lo


def sample_points(problem: Problem, count: int, seed: int = 0x5EEDB0C5,
                  radius: float = 2.0) -> list:
    """Deterministic sample points inside the problem's declared box."""
    rng = SplitMix64(seed)
    lo, hi = _sample_bounds(problem, radius)
    return [lo + (hi - lo) * rng.uniforms(problem.dim) for _ in range(count)]


def grad_check(problem: Problem, points) -> float:
    """Max relative error of f' against central finite differences.

    Coordinate-wise differences for dim <= 200; for larger problems 50
    seeded random directions (a full coordinate sweep would straddle
    penalty kinks often enough to pollute the measurement).
    """
    worst = 0.0
    dirs = None
    if problem.dim > MAX_COORD_DIM:
        rng = SplitMix64(0xD1FF5EED)
        dirs = []
        for _ in range(50):
            d = rng.normals(problem.dim)
            d /= np.linalg.norm(d)
            dirs.append(d)
    for x in points:
        x = np.asarray(x, dtype=float)
        g = np.asarray(problem.f_grad(x), dtype=float)
        step = GRAD_STEP * (1.0 + float(np.linalg.norm(x)))
        if dirs is None:
            for i in range(problem.dim):
                e = np.zeros(problem.dim)
                e[i] = step
                fd = (float(problem.f_value(x + e)) - float(problem.f_value(x - e))) / (2 * step)
                worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
        else:
            gnorm = float(np.linalg.norm(g))
            for d in dirs:
                fd = (float(problem.f_value(x + step * d))
                      - float(problem.f_value(x - step * d))) / (2 * step)
                worst = max(worst, abs(fd - float(g @ d)) / max(1.0, gnorm))
    return worst


def hess_symmetry_check(problem: Problem, points, pairs_per_point: int = 5,
                        seed: int = 0x51D35EED) -> float:
    """Max relative asymmetry |<Hu,v> - <Hv,u>| over random probe pairs."""
    rng = SplitMix64(seed)
    worst = 0.0
    for x in points:
        H = problem.hess(np.asarray(x, dtype=float))
        for _ in range(pairs_per_point):
            u = rng.normals(problem.dim)
            v = rng.normals(problem.dim)
            a = float(_apply_H(H, u) @ v)
            b = float(_apply_H(H, v) @ u)
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    return worst


def _model_error_ratio(problem: Problem, x, y) -> Optional[float]:
    d = y - x
    nd = problem.metric.norm(d)
    if not np.isfinite(nd) or nd <= 1e-14:
        return None
    gx = np.asarray(problem.f_grad(x), dtype=float)
    gy = np.asarray(problem.f_grad(y), dtype=float)
    err = gy - gx - _apply_H(problem.hess(x), d)
    return problem.metric.dual_norm(err) / nd


def assumption2_sample(problem: Problem, box_radius: float = 2.0,
                       pairs: int = 40, seed: int = 0xA55E55,
                       include=()) -> float:
    """Sampled model-error constant: max ratio over point pairs.

    Draws box-scale pairs and short-range pairs inside the sampling box;
    when the problem exposes a ``near_kink`` sampler, adds pairs that
    straddle the active-set boundary — dense short steps plus
    single-coordinate crossings, which realise the worst per-component
    curvature jumps.  ``include`` supplies extra (x, y) pairs (for
    example consecutive trace iterates); the estimate is monotone in the
    sample set.
    """
    rng = SplitMix64(seed)
    lo, hi = _sample_bounds(problem, box_radius)
    span = hi - lo
    best = 0.0

    def feed(x, y):
        nonlocal best
        r = _model_error_ratio(problem, np.asarray(x, float), np.asarray(y, float))
        if r is not None and np.isfinite(r):
            best = max(best, r)

    for _ in range(pairs):
        x = lo + span * rng.uniforms(problem.dim)
        y = lo + span * rng.uniforms(problem.dim)
        feed(x, y)
        feed(x, x + 1e-3 * span * (rng.uniforms(problem.dim) - 0.5))

    if problem.near_kink is not None:
        for _ in range(max(4, pairs // 4)):
            x = np.asarray(problem.near_kink(rng), dtype=float)
            feed(x, x + 1e-7 * rng.normals(problem.dim))
            feed(x, x + 1e-2 * span * (rng.uniforms(problem.dim) - 0.5))
            # single-coordinate kink crossings
            idx = (rng.raw(4) % np.uint64(problem.dim)).astype(int)
            for i in idx:
                y = x.copy()
                y[i] -= 4e-9 * float(rng.signs(1)[0])
                feed(x, y)

    for x, y in include:
        feed(np.asarray(x, float), np.asarray(y, float))
    return best


@dataclass
class RateReport:
    """Outcome of a full trace audit.

    Booleans are per-check verdicts; ``None`` marks a check whose
    required declarations (known minimum value, PL modulus, sublevel-set
    diameter) the problem does not supply — not-applicable is reported,
    never silently passed.  ``violations`` holds one (k, name, lhs, rhs)
    tuple per failed inequality; it is empty exactly when every
    applicable check passed.
    """
    monotone_ok: bool
    acceptance_ok: bool
    lambda_bound_ok: bool
    step_count_ok: bool
    step_length_ok: bool
    sublinear_envelope_ok: Optional[bool]
    pl_linear_envelope_ok: Optional[bool]
    convex_envelope_ok: Optional[bool]
    superlinear_detected: bool
    lambda_to_zero: bool
    L_hat: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "monotone_ok": self.monotone_ok,
            "acceptance_ok": self.acceptance_ok,
            "lambda_bound_ok": self.lambda_bound_ok,
            "step_count_ok": self.step_count_ok,
            "step_length_ok": self.step_length_ok,
            "sublinear_envelope_ok": self.sublinear_envelope_ok,
            "pl_linear_envelope_ok": self.pl_linear_envelope_ok,
            "convex_envelope_ok": self.convex_envelope_ok,
            "superlinear_detected": self.superlinear_detected,
            "lambda_to_zero": self.lambda_to_zero,
            "L_hat": self.L_hat,
            "violations": [[int(k), name, float(lhs), float(rhs)]
                           for (k, name, lhs, rhs) in self.violations],
        }


def trajectory_pairs(trace: Trace):
    """Consecutive iterate pairs of a trace, for assumption2_sample."""
    xs = [trace.x0] + list(trace.iterates)
    return list(zip(xs[:-1], xs[1:]))


def audit_trace(trace: Trace, problem: Problem, L_hat: float = 0.0,
                config: Optional[dict] = None, d0: Optional[float] = None,
                include_trajectory: bool = True) -> RateReport:
    """Re-derive every audited inequality of a finished run.

    ``L_hat`` is the sampled model-error constant (see
    ``assumption2_sample``); the trace's own consecutive-iterate pairs
    are folded in by default, since the theory bounds must hold along
    the segments the run actually visited.  ``d0`` optionally declares
    the sublevel-set diameter for the convex envelope.
    """
    cfg = config if config is not None else trace.config
    alpha = cfg["alpha"]
    beta = cfg["beta"]
    m = cfg["m"]
    Lam0 = cfg["lambda0"]
    recs = trace.records
    violations = []

    L_eff = float(L_hat)
    if include_trajectory:
        for x, y in trajectory_pairs(trace):
            r = _model_error_ratio(problem, x, y)
            if r is not None and np.isfinite(r):
                L_eff = max(L_eff, r)
    lam_bar = max(2.0 * m * L_INFLATION * L_eff, Lam0)

    # (a) monotone objective
    monotone_ok = True
    F_prev = trace.F0
    for r in recs:
        if r.F > F_prev + SLACK * max(1.0, abs(F_prev)):
            monotone_ok = False
            violations.append((r.k, "monotone_F", r.F, F_prev))
        F_prev = r.F

    # (b) regulariser ceiling
    lambda_bound_ok = True
    for r in recs:
        if r.lam > lam_bar * (1.0 + SLACK):
            lambda_bound_ok = False
            violations.append((r.k, "lambda_bound", r.lam, lam_bar))

    # (c) backtracking-count identity: sum of accepted trial exponents
    step_count_ok = True
    bound_const = math.log2(max(0.5, m * L_INFLATION * L_eff / Lam0)) + 1.0
    n_steps = 0
    for r in recs:
        n_steps += r.j
        bound = r.k + 1 + bound_const
        if n_steps > bound + SLACK * max(1.0, abs(bound)):
            step_count_ok = False
            violations.append((r.k, "step_count", float(n_steps), bound))

    # (g) acceptance inequalities re-evaluated from stored iterates
    acceptance_ok = True
    xs = [trace.x0] + list(trace.iterates)
    F_vals = [trace.F0] + [r.F for r in recs]
    rng = SplitMix64(0xACCE9700)
    for i, r in enumerate(recs):
        x_prev, x_next = xs[i], xs[i + 1]
        g_next = trace.grads[i]
        d = x_next - x_prev
        gpn2 = float(g_next @ problem.metric.solve(g_next))
        lhs1 = float(g_next @ (-d))
        rhs1 = (alpha / r.lam) * gpn2
        if lhs1 < rhs1 - SLACK * max(1.0, abs(rhs1)):
            acceptance_ok = False
            violations.append((r.k, "acceptance_gradient", lhs1, rhs1))
        dec = F_vals[i] - F_vals[i + 1]
        rhs2 = beta * r.lam * float(problem.metric.inner(d, d))
        if dec < rhs2 - SLACK * max(1.0, abs(rhs2)):
            acceptance_ok = False
            violations.append((r.k, "acceptance_decrease", dec, rhs2))
        # certified-gradient consistency
        if problem.smooth:
            if not np.array_equal(g_next,
                                  np.asarray(problem.f_grad(x_next), dtype=float)):
                acceptance_ok = False
                violations.append((r.k, "gradient_cache", 0.0, 0.0))
        else:
            psi_sub = g_next - np.asarray(problem.f_grad(x_next), dtype=float)
            psi_x = problem.psi(x_next)
            lo, hi = _sample_bounds(problem, 2.0)
            for _ in range(3):
                y = lo + (hi - lo) * rng.uniforms(problem.dim)
                gap = problem.psi(y) - psi_x - float(psi_sub @ (y - x_next))
                if gap < -1e-9:
                    acceptance_ok = False
                    violations.append((r.k, "psi_subgradient", gap, 0.0))

    # step-length bound at accepted steps (needs a certified subgradient
    # at the step's base point, available from the previous record)
    step_length_ok = True
    if problem.hess_psd:
        for i in range(1, len(recs)):
            lhs = recs[i].step_norm
            rhs = recs[i - 1].grad_dual_norm / recs[i].lam
            if lhs > rhs * (1.0 + SLACK):
                step_length_ok = False
                violations.append((recs[i].k, "step_length", lhs, rhs))

    # (d) sublinear envelope for the minimal gradient norm
    sublinear_ok: Optional[bool] = None
    if problem.f_star is not None and recs:
        sublinear_ok = True
        gap0 = trace.F0 - problem.f_star
        running = math.inf
        for i, r in enumerate(recs):
            running = min(running, r.grad_dual_norm)
            k = i + 1
            env = math.sqrt(max(0.0, lam_bar * gap0 / (beta * alpha * alpha * k)))
            if running > env * (1.0 + SLACK):
                sublinear_ok = False
                violations.append((r.k, "sublinear_envelope", running, env))

    # (e) linear envelope under the declared PL modulus
    pl_ok: Optional[bool] = None
    if (problem.f_star is not None and problem.strong_convexity is not None
            and recs):
        pl_ok = True
        mu = problem.strong_convexity
        gap0 = trace.F0 - problem.f_star
        rate = 2.0 * beta * alpha * alpha * mu / (2.0 * beta * alpha * alpha * mu + lam_bar)
        for i, r in enumerate(recs):
            env = math.exp(-rate * (i + 1)) * gap0
            lhs = r.F - problem.f_star
            if lhs > env * (1.0 + SLACK) + 1e-15 * max(1.0, abs(gap0)):
                pl_ok = False
                violations.append((r.k, "pl_envelope", lhs, env))

    # (f) convex envelope, only with a declared sublevel-set diameter
    convex_ok: Optional[bool] = None
    if d0 is not None and problem.f_star is not None and recs:
        convex_ok = True
        g0 = trace.g0_norm
        for i, r in enumerate(recs):
            k = i + 1
            env = g0 * d0 * math.exp(-k / 4.0) + 2.0 * d0 * d0 * lam_bar / (alpha * k)
            lhs = r.F - problem.f_star
            if lhs > env * (1.0 + SLACK):
                convex_ok = False
                violations.append((r.k, "convex_envelope", lhs, env))

    lam_zero, superlinear = superlinear_check(trace)
    return RateReport(
        monotone_ok=monotone_ok,
        acceptance_ok=acceptance_ok,
        lambda_bound_ok=lambda_bound_ok,
        step_count_ok=step_count_ok,
        step_length_ok=step_length_ok,
        sublinear_envelope_ok=sublinear_ok,
        pl_linear_envelope_ok=pl_ok,
        convex_envelope_ok=convex_ok,
        superlinear_detected=bool(superlinear),
        lambda_to_zero=bool(lam_zero),
        L_hat=L_eff,
        violations=violations,
    )


def superlinear_check(trace: Trace, window: int = 5):
    """Detect the fast local regime from the trace tail.

    Returns ``(lambda_to_zero, superlinear)``: the regulariser decayed
    by at least a factor 2 per accepted step on average over the last
    ``window`` records, ending at or below Lambda_0 / 2^(window-1); and
    the gradient-norm ratios over the last ``window`` steps decrease
    strictly with the final ratio at most 0.1.  Traces shorter than the
    window give ``(None, None)`` (not applicable).
    """
    recs = trace.records
    if len(recs) < window + 1:
        return None, None
    lam0 = trace.config["lambda0"]
    lams = [r.lam for r in recs[-window:]]
    lam_zero = (lams[0] / lams[-1] >= 2.0 ** (window - 1)
                and lams[-1] <= lam0 / 2.0 ** (window - 1))
    gs = [r.grad_dual_norm for r in recs[-(window + 1):]]
    ratios = [gs[i + 1] / max(gs[i], 1e-300) for i in range(window)]
    decreasing = all(ratios[i + 1] < ratios[i] for i in range(window - 1))
    superlinear = decreasing and ratios[-1] <= 0.1
    return lam_zero, superlinear


def _resolve_step(problem: Problem, x, lam):
    x = np.asarray(x, dtype=float)
    g = np.asarray(problem.f_grad(x), dtype=float)
    H = problem.hess(x)
    if problem.smooth:
        return smooth_step(problem, x, g, H, lam)
    return composite_step(problem, x, g, H, lam)


def dm_condition_sample(trace: Trace, problem: Problem,
                        count: int = 8) -> Optional[list]:
    """Curvature-compatibility ratios along the trace tail.

    For the last ``count`` accepted iterates, recomputes the half-
    regularised step x+(lambda_k/2, x_k) and returns
    ``||(H(x+) - H(x_k))(x+ - x*)||_* / ||x+ - x_k||`` — the quantity
    whose decay to zero drives superlinear convergence.  Requires a
    known solution (or a projector onto the solution set, applied to
    the final iterate); returns None when neither is declared.
    """
    if problem.solution is not None:
        x_star = np.asarray(problem.solution, dtype=float)
    elif problem.project_solution is not None and trace.iterates:
        x_star = np.asarray(problem.project_solution(trace.iterates[-1]), dtype=float)
    else:
        return None
    xs = [trace.x0] + list(trace.iterates)
    recs = trace.records
    out = []
    for i in range(max(0, len(recs) - count), len(recs)):
        x_k = xs[i]
        lam = recs[i].lam / 2.0
        sub = _resolve_step(problem, x_k, lam)
        if not sub.computable:
            continue
        x_plus = sub.x_plus
        dn = problem.metric.norm(x_plus - x_k)
        if dn <= 1e-300:
            out.append(0.0)
            continue
        dH = (_apply_H(problem.hess(x_plus), x_plus - x_star)
              - _apply_H(problem.hess(x_k), x_plus - x_star))
        out.append(problem.metric.dual_norm(dH) / dn)
    return out


def manifold_check(trace: Trace) -> Optional[int]:
    """First index from which the first coordinate stays exactly zero.

    The iterate sequence counts the start point as index 0.  Returns
    None when the final iterate has not identified the manifold.
    """
    xs = [trace.x0] + list(trace.iterates)
    idx = None
    for i, x in enumerate(xs):
        if float(x[0]) == 0.0:
            if idx is None:
                idx = i
        else:
            idx = None
    return idx


def _psi_subgradient_at(problem: Problem, x):
    """A member of the subdifferential of psi at x via a tiny prox step."""
    if problem.smooth:
        return np.zeros_like(x)
    t = 1e-12 * (1.0 + float(np.linalg.norm(x)))
    p = problem.prox(x, t)
    return (x - p) / t


def step_length_bound(problem: Problem, x, lam: float, mu: float = 0.0):
    """(lhs, rhs) for: step length <= subgradient dual norm / (lam + mu).

    ``mu`` is a lower curvature bound for the model (H >= mu R); pass 0
    when only positive semidefiniteness is known.  Returns None when the
    step is not computable.
    """
    x = np.asarray(x, dtype=float)
    sub = _resolve_step(problem, x, lam)
    if not sub.computable:
        return None
    g_x = np.asarray(problem.f_grad(x), dtype=float) + _psi_subgradient_at(problem, x)
    lhs = problem.metric.norm(sub.x_plus - x)
    rhs = problem.metric.dual_norm(g_x) / (lam + mu)
    return lhs, rhs


def step_shift_bound(problem: Problem, x, lam: float, lam2: float):
    """(lhs, rhs) for the step's sensitivity in the regulariser.

    For lam <= lam2: ||x+(lam) - x+(lam2)|| <= (lam2-lam)/lam2 * ||x - x+(lam)||.
    Returns None when either step is not computable.
    """
    if not lam <= lam2:
        raise ValueError("need lam <= lam2")
    x = np.asarray(x, dtype=float)
    s1 = _resolve_step(problem, x, lam)
    s2 = _resolve_step(problem, x, lam2)
    if not (s1.computable and s2.computable):
        return None
    lhs = problem.metric.norm(s1.x_plus - s2.x_plus)
    rhs = (lam2 - lam) / lam2 * problem.metric.norm(x - s1.x_plus)
    return lhs, rhs


def step_alignment_bound(problem: Problem, x, lam: float, L: float):
    """(lhs, rhs) for the alignment inequality behind the acceptance test.

    With model error bounded by L * r over the step of length r:
    <F'(x+), x - x+>  >=  ||F'(x+)||_*^2/(2 lam) + lam r^2/2 - (L r)^2/(2 lam).
    Returns None when the step is not computable.
    """
    x = np.asarray(x, dtype=float)
    sub = _resolve_step(problem, x, lam)
    if not sub.computable:
        return None
    x_plus = sub.x_plus
    g_plus = np.asarray(problem.f_grad(x_plus), dtype=float)
    if not problem.smooth:
        g_plus = g_plus + sub.psi_grad
    r = problem.metric.norm(x - x_plus)
    gd = problem.metric.dual_norm(g_plus)
    lhs = float(g_plus @ (x - x_plus))
    rhs = gd * gd / (2.0 * lam) + lam * r * r / 2.0 - (L * r) ** 2 / (2.0 * lam)
    return lhs, rhs

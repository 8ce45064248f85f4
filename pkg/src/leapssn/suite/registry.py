"""Named problem builders for the command-line front end.

Each entry maps a CLI problem name to a builder taking the generic
knobs (``gamma``, ``n``, ``seed``) and returning a fully-declared
Problem, plus the gradient tolerance the problem is conventionally run
at (hinge losses are usually driven to 1e-6, everything else to 1e-8).

``broken_gradient`` is a deliberate negative control: its reported
gradient carries a constant bias, so derivative checks must flag it
while the solver itself still terminates (at the minimiser of the
consistent, silently shifted objective).
"""

from __future__ import annotations

import numpy as np

from ..problem import Problem
from .academic import partial_smooth_2d, quadratic, rank_deficient_ls, rosenbrock
from .imaging import add_noise, phantom
from .obstacle import membrane_problem, plate_problem
from .svm import svm_data, svm_problem
from .tv import tv_dual_problem

SVM_SAMPLES = 1000
TV_SIGMA = 0.06
DEFAULT_SEEDS = {"quadratic": 3, "rank_deficient": 0, "svm": 1, "tv": 5}


def broken_gradient_problem() -> Problem:
    """Quadratic whose reported gradient has a constant bias (test fixture)."""
    bias = np.array([1e-3, 0.0])

    def f_value(x):
        return 0.5 * float(x @ x)

    def f_grad(x):
        return x + bias

    return Problem(
        dim=2,
        f_value=f_value,
        f_grad=f_grad,
        hess=lambda x: np.eye(2),
        hess_psd=True,
        name="broken_gradient",
        x0=np.array([1.0, 1.0]),
        sample_box=(np.full(2, -2.0), np.full(2, 2.0)),
    )


def _build_quadratic(gamma, n, seed):
    return quadratic(n=n if n else 8, seed=seed if seed is not None else 3)


def _build_rosenbrock(gamma, n, seed):
    return rosenbrock(n=n if n else 10)


def _build_rank_deficient(gamma, n, seed):
    n = n if n else 20
    return rank_deficient_ls(n=n, rank=min(12, n),
                             seed=seed if seed is not None else 0)


def _build_partial_smooth(gamma, n, seed):
    return partial_smooth_2d()


def _build_svm(gamma, n, seed):
    X, y = svm_data(SVM_SAMPLES, n if n else 2,
                    seed if seed is not None else 1)
    return svm_problem(X, y, gamma if gamma is not None else 1.0)


def _build_membrane(gamma, n, seed):
    return membrane_problem(n=n if n else 65,
                            gamma=gamma if gamma is not None else 1e4)


def _build_plate(gamma, n, seed):
    return plate_problem(n=n if n else 65,
                         gamma=gamma if gamma is not None else 1e4)


def _build_tv(gamma, n, seed):
    n = n if n else 64
    clean = phantom(n)
    noisy = add_noise(clean, TV_SIGMA, seed if seed is not None else 5)
    prob = tv_dual_problem(noisy, gamma if gamma is not None else 1e4)
    prob.noisy_image = noisy
    prob.clean_image = clean
    return prob


def _build_broken_gradient(gamma, n, seed):
    return broken_gradient_problem()


_REGISTRY = {
    "quadratic": (_build_quadratic, 1e-8),
    "rosenbrock": (_build_rosenbrock, 1e-8),
    "rank_deficient": (_build_rank_deficient, 1e-8),
    "partial_smooth": (_build_partial_smooth, 1e-8),
    "svm": (_build_svm, 1e-6),
    "membrane": (_build_membrane, 1e-8),
    "plate": (_build_plate, 1e-8),
    "tv": (_build_tv, 1e-8),
    "broken_gradient": (_build_broken_gradient, 1e-8),
}

PROBLEM_NAMES = tuple(sorted(_REGISTRY))


def build_problem(name: str, gamma=None, n=None, seed=None) -> Problem:
    """Build the named problem; raises KeyError on unknown names."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}")
    build, _ = _REGISTRY[name]
    return build(gamma, n, seed)


def default_tol(name: str) -> float:
    if name not in _REGISTRY:
        raise KeyError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}")
    return _REGISTRY[name][1]

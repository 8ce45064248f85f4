"""Composite minimisation problems ``F = f + psi``.

A :class:`Problem` bundles the smooth part ``f`` (value, gradient, and a
symmetric curvature operator ``H(x)``), an optional nonsmooth part ``psi``
given by its value and Euclidean proximal map, the SPD metric defining norms,
and optional declarations (known minimum value, strong-convexity modulus,
curvature-variation bound, sampling region) that the verification harness
uses to decide which theory checks apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hilbert import Metric


@dataclass
class Problem:
    """Composite objective on R^dim.

    Required pieces: ``dim``, ``f_value``, ``f_grad``, ``hess`` and
    ``metric``.  ``hess(x)`` returns a symmetric operator (dense ndarray,
    scipy sparse matrix, or matvec callable) -- for nonsmooth-gradient
    problems it is a measurable selection of the generalized derivative.

    The nonsmooth part is either absent (``psi_value is None``; the problem
    is smooth) or given by ``psi_value`` together with ``prox``, where
    ``prox(v, t)`` evaluates the Euclidean proximal map of ``t * psi`` at
    ``v``.  Problems with a nontrivial ``psi`` must use the identity metric
    (the proximal subsolver works in the coordinate inner product).

    ``f_decrease(x, x_plus)`` optionally evaluates ``f(x) - f(x_plus)`` in
    difference form.  Near tight tolerances the naive subtraction of two
    O(1) objective values floors at ulp(F) while true decreases sit orders
    of magnitude lower; problems whose structure allows exact cancellation
    (quadratics plus clipped penalties) should supply this.
    """

    dim: int
    f_value: Callable[[np.ndarray], float]
    f_grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], object]
    metric: Metric = field(default_factory=Metric)
    psi_value: Optional[Callable[[np.ndarray], float]] = None
    prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = ""

    # optional structure/performance hooks
    f_decrease: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    hess_psd: bool = False          # every H(x) is positive semidefinite
    x0: Optional[np.ndarray] = None
    lambda0: Optional[float] = None

    # optional declarations consumed by the verification harness
    f_star: Optional[float] = None
    strong_convexity: Optional[float] = None    # PL / strong-convexity modulus
    curvature_bound: Optional[float] = None     # bound on the H-variation scale
    solution: Optional[np.ndarray] = None
    project_solution: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sample_box: Optional[tuple] = None          # (lo, hi) arrays for sampling
    near_kink: Optional[Callable[[object], np.ndarray]] = None

    def __post_init__(self):
        if self.psi_value is not None and self.prox is None:
            raise ValueError("composite problems need a prox for psi")
        if self.psi_value is not None and self.metric.kind != "identity":
            raise ValueError("composite problems require the identity metric")

    @property
    def smooth(self) -> bool:
        return self.psi_value is None

    def psi(self, x) -> float:
        return 0.0 if self.psi_value is None else float(self.psi_value(x))

    def value(self, x) -> float:
        """Full objective F(x) = f(x) + psi(x)."""
        return float(self.f_value(x)) + self.psi(x)

    def decrease(self, x, x_plus, psi_x=None, psi_xp=None) -> float:
        """F(x) - F(x_plus), in difference form when the problem supports it."""
        if self.f_decrease is not None:
            df = float(self.f_decrease(x, x_plus))
        else:
            df = float(self.f_value(x)) - float(self.f_value(x_plus))
        if self.psi_value is None:
            return df
        if psi_x is None:
            psi_x = self.psi(x)
        if psi_xp is None:
            psi_xp = self.psi(x_plus)
        return df + psi_x - psi_xp

    def start_point(self, x0=None) -> np.ndarray:
        if x0 is not None:
            return np.asarray(x0, dtype=float).copy()
        if self.x0 is not None:
            return np.asarray(self.x0, dtype=float).copy()
        return np.zeros(self.dim)

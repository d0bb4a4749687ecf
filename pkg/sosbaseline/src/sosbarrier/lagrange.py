"""Multiplier-degree study: when can an SoS decomposition certify a sign?

Certifying that a polynomial is nonnegative on an interval S through an
SoS multiplier requires the "error" polynomial u = a - lambda * h (with h
describing S) to be globally nonnegative.  When deg(lambda * h) stays below
deg(a) and a has a negative leading coefficient, u inherits that leading
coefficient and can never be a sum of squares; once the multiplier degree
pushes deg(lambda * h) above deg(a), certificates exist and tighten.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .polynomials import Poly, monomials_upto, padd, peval, pmul, ppow

# S = [0, 1] encoded as h(x) = x - x^2 >= 0 (the form x^2 - x that sometimes
# appears in print has the wrong sign: its nonnegativity set is not [0, 1])
SET_QUADRATIC: Poly = {(1,): 1.0, (2,): -1.0}

# degree-6 target, nonnegative exactly on a neighborhood of [0, 1] and
# negative for large |x| (negative leading coefficient), with a zero at 0.5
DEFAULT_TARGET: Poly = pmul(pmul({(0,): 1.2, (1,): -1.0},
                                 {(0,): 0.2, (1,): 1.0}),
                            ppow({(0,): -0.5, (1,): 1.0}, 4))


@dataclass(frozen=True)
class LagrangeReport:
    feasible: bool
    error_poly_min: float
    m_lambda: int


def _gram_poly(q: cp.Variable, z: list) -> dict:
    """Symbolic coefficients of z^T Q z as {monomial: cvxpy expression}."""
    out: dict = {}
    for i, alpha in enumerate(z):
        for j, beta in enumerate(z):
            mono = tuple(x + y for x, y in zip(alpha, beta))
            out[mono] = out.get(mono, 0) + q[i, j]
    return out


def lagrange_demo(m_lambda: int, target: Poly | None = None,
                  set_poly: Poly | None = None,
                  solver: str = "CLARABEL") -> LagrangeReport:
    """Search for an SoS multiplier certifying the target's sign on [0, 1].

    Solves: find lambda in SoS of degree <= m_lambda with
    u = target - lambda * h in SoS.  Reports feasibility and the global
    minimum (on a wide grid) of the error polynomial u; infeasible searches
    fall back to the plain even-power multiplier (x - 0.5)^m_lambda so the
    reported u still illustrates where certification breaks down.
    """
    if m_lambda % 2:
        raise ValueError("multiplier degree must be even")
    a = dict(target if target is not None else DEFAULT_TARGET)
    h = dict(set_poly if set_poly is not None else SET_QUADRATIC)

    d_lam = m_lambda // 2
    z_lam = monomials_upto(1, d_lam)
    deg_u = max(max(sum(m) for m in a), m_lambda + 2)
    d_u = math.ceil(deg_u / 2)
    z_u = monomials_upto(1, 2 * d_u)

    q_lam = cp.Variable((len(z_lam), len(z_lam)), symmetric=True)
    q_u = cp.Variable((d_u + 1, d_u + 1), symmetric=True)
    lam_coeffs = _gram_poly(q_lam, z_lam)
    u_coeffs = _gram_poly(q_u, monomials_upto(1, d_u))

    constraints = [q_lam >> 0, q_u >> 0]
    for mono in z_u:
        lhs = a.get(mono, 0.0)
        for hk, hc in h.items():
            key = tuple(x - y for x, y in zip(mono, hk))
            if all(k >= 0 for k in key) and key in lam_coeffs:
                lhs = lhs - hc * lam_coeffs[key]
        constraints.append(u_coeffs.get(mono, 0) == lhs)
    prob = cp.Problem(cp.Minimize(0), constraints)
    try:
        prob.solve(solver=solver)
    except cp.SolverError:
        prob.status = "solver_error"
    feasible = prob.status in ("optimal", "optimal_inaccurate")

    if feasible:
        lam = {mono: float(val) for mono, val in
               ((m2, expr.value) for m2, expr in lam_coeffs.items())}
    else:
        lam = ppow({(0,): -0.5, (1,): 1.0}, m_lambda)
    u = padd(a, pmul(lam, h), scale=-1.0)
    grid = np.linspace(-3.0, 4.0, 20_001)[:, None]
    u_min = float(np.min(peval(u, grid)))
    return LagrangeReport(feasible=feasible, error_poly_min=u_min,
                          m_lambda=m_lambda)

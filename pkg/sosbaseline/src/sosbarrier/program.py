"""Sum-of-squares formulation of barrier synthesis, solved as an SDP.

The barrier template uses cumulative degree.  Each rectangle of each family
contributes one positivity constraint over its semi-algebraic description
(per-dimension quadratics): the constrained polynomial minus one SoS
Lagrange multiplier per set-defining quadratic must itself be a sum of
squares.  Coefficient matching against Gram matrices turns every constraint
into linear equalities plus semidefinite blocks; the objective
minimize eta + K * gamma matches the LP lane so certificates compare
directly.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from .polynomials import (Box, Poly, cover_difference,
                          expected_step_monomial, gaussian_moment_tables,
                          monomials_upto, pdeg)

SCHEMA_VERSION = 1


class SosError(RuntimeError):
    """Model building or solver failure."""


@dataclass(frozen=True)
class SosProblem:
    """Synthesis instance plus the SoS template degrees."""

    name: str
    dim: int
    dynamics: list
    moment_tables: list
    horizon: int
    domain_boxes: list
    unsafe_boxes: list
    init_boxes: list
    safe_boxes: list
    m: int
    m_lambda: int

    @property
    def composed_degree(self) -> int:
        n = max(pdeg(f) for f in self.dynamics)
        return self.m * n


def dense_to_poly(coeffs, dim: int, max_degree: int) -> Poly:
    """Decode the shared dense-tensor encoding (last exponent fastest)."""
    arr = np.asarray(coeffs, dtype=float).reshape((max_degree + 1,) * dim)
    out: Poly = {}
    for idx in np.ndindex(*arr.shape):
        if arr[idx] != 0.0:
            out[tuple(idx)] = float(arr[idx])
    return out


def poly_to_dense(poly: Poly, dim: int, max_degree: int) -> list:
    arr = np.zeros((max_degree + 1,) * dim)
    for mono, c in poly.items():
        arr[mono] = c
    return arr.ravel().tolist()


def sos_problem_from_file(path, m: int, m_lambda: int,
                          horizon: int | None = None) -> SosProblem:
    """Read the shared problem-file schema and fix the template degrees."""
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version in {path}")
    dim = int(data["dimension"])
    dynamics = [dense_to_poly(spec["coeffs"], dim, spec["max_degree"])
                for spec in data["dynamics"]]
    noise = data["noise"]
    max_order = m * max(pdeg(f) for f in dynamics) + m
    if noise["type"] == "gaussian":
        sigma = np.atleast_1d(np.asarray(noise["sigma"], dtype=float))
        if sigma.size == 1:
            sigma = np.full(dim, sigma[0])
        tables = gaussian_moment_tables(sigma, max_order)
    elif noise["type"] == "moments":
        tables = [np.asarray(t, dtype=float) for t in noise["tables"]]
    else:
        raise ValueError(f"unknown noise type {noise['type']!r}")

    state = Box(tuple(data["domain"]["lo"]), tuple(data["domain"]["hi"]))
    unsafe = [Box(tuple(r["lo"]), tuple(r["hi"]))
              for r in data.get("unsafe", [])]
    init = [Box(tuple(r["lo"]), tuple(r["hi"])) for r in data["init"]]
    margin = data.get("frame_margin")
    if margin is None:
        margin = 0.2 * min(h - l for l, h in zip(state.lo, state.hi))
    if margin > 0:
        padded = state.pad(margin)
        frame = cover_difference(padded, [state])
        domain = [padded]
    else:
        frame = []
        domain = [state]
    safe = cover_difference(state, unsafe)
    if not safe:
        raise ValueError("unsafe set covers the whole state box")
    return SosProblem(
        name=data.get("name", ""),
        dim=dim,
        dynamics=dynamics,
        moment_tables=tables,
        horizon=int(horizon if horizon is not None else data.get("horizon", 10)),
        domain_boxes=domain,
        unsafe_boxes=frame + unsafe,
        init_boxes=init,
        safe_boxes=safe,
        m=m,
        m_lambda=m_lambda,
    )


@dataclass
class SosModel:
    """Assembled SDP with handles to the decision variables."""

    problem: cp.Problem
    b: cp.Variable
    eta: cp.Variable
    gamma: cp.Variable
    b_monomials: list
    gram_blocks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def n_scalar_variables(self) -> int:
        n = self.b.size + 2
        for q in self.gram_blocks:
            k = q.shape[0]
            n += k * (k + 1) // 2
        return n

    @property
    def n_equalities(self) -> int:
        return self.meta["equality_rows"]


def _pair_products(z: list, index: dict, dim: int,
                   weights: Poly | None = None) -> sp.csr_matrix:
    """Row-selecting matrix mapping vec(Q) to polynomial coefficients.

    Entry (mu, (alpha, beta)) accumulates the coefficient that Q[alpha, beta]
    contributes to monomial mu of z^T Q z (times the optional weight
    polynomial).  vec ordering is column-major to match cvxpy.
    """
    n = len(z)
    rows, cols, vals = [], [], []
    w = weights if weights is not None else {(0,) * dim: 1.0}
    for a, alpha in enumerate(z):
        for b_i, beta in enumerate(z):
            base = tuple(x + y for x, y in zip(alpha, beta))
            for kappa, ck in w.items():
                mono = tuple(x + y for x, y in zip(base, kappa))
                mu = index.get(mono)
                if mu is None:
                    raise SosError("monomial outside the matching range")
                rows.append(mu)
                cols.append(b_i * n + a)  # column-major vec: col*n + row
                vals.append(ck)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(index), n * n))


def _sos_side(dim: int, d_main: int, d_lam: int, quadratics: list,
              index: dict, blocks: list, constraints: list):
    """Gram expression for one region: main SoS plus one multiplier per face."""
    z_main = monomials_upto(dim, d_main)
    q_main = cp.Variable((len(z_main), len(z_main)), symmetric=True)
    constraints.append(q_main >> 0)
    blocks.append(q_main)
    total = _pair_products(z_main, index, dim) @ cp.vec(q_main, order="F")
    z_lam = monomials_upto(dim, d_lam)
    for h in quadratics:
        q_l = cp.Variable((len(z_lam), len(z_lam)), symmetric=True)
        constraints.append(q_l >> 0)
        blocks.append(q_l)
        total = total + _pair_products(z_lam, index, dim, h) @ cp.vec(
            q_l, order="F")
    return total


def build_sos_program(spec: SosProblem) -> SosModel:
    """Assemble the four SoS constraint families into one cvxpy problem."""
    dim = spec.dim
    if spec.m_lambda % 2:
        raise ValueError("multiplier degree must be even")
    d_lam = spec.m_lambda // 2
    mon_b = monomials_upto(dim, spec.m)
    n_b = len(mon_b)
    b = cp.Variable(n_b, name="b")
    eta = cp.Variable(name="eta")
    gamma = cp.Variable(name="gamma")

    # expected one-step coefficients per barrier monomial (numeric, exact)
    gap_polys = []
    for mono in mon_b:
        comp = expected_step_monomial(mono, spec.dynamics, spec.moment_tables)
        gap_polys.append(padd_neg(comp, mono))

    p_gap = max((pdeg(g) for g in gap_polys), default=0)
    constraints = [eta >= 0, eta <= 1, gamma >= 0, gamma <= 1]
    blocks: list = []
    equality_rows = 0

    def add_family(boxes, deg_expr, lhs_of):
        nonlocal equality_rows
        d_main = math.ceil(deg_expr / 2)
        match_deg = max(2 * d_main, spec.m_lambda + 2)
        d_main = math.ceil(match_deg / 2)
        mons = monomials_upto(dim, 2 * d_main)
        index = {mono: i for i, mono in enumerate(mons)}
        for box in boxes:
            lhs = lhs_of(index)
            rhs = _sos_side(dim, d_main, d_lam, box.quadratics(), index,
                            blocks, constraints)
            constraints.append(lhs == rhs)
            equality_rows += len(mons)

    def b_matrix(index, sign):
        rows, cols, vals = [], [], []
        for j, mono in enumerate(mon_b):
            rows.append(index[mono])
            cols.append(j)
            vals.append(sign)
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(index), n_b))

    def unit(index, mono=None):
        e = np.zeros(len(index))
        e[index[mono or (0,) * dim]] = 1.0
        return e

    # domain: B is an SoS combination over each domain box
    add_family(spec.domain_boxes, spec.m,
               lambda index: b_matrix(index, +1.0) @ b)
    # unsafe: B - 1
    add_family(spec.unsafe_boxes, spec.m,
               lambda index: b_matrix(index, +1.0) @ b - unit(index))
    # initial: eta - B
    add_family(spec.init_boxes, spec.m,
               lambda index: b_matrix(index, -1.0) @ b + unit(index) * eta)
    # safe: gamma - (E[B o f + v] - B)
    def safe_lhs(index):
        rows, cols, vals = [], [], []
        for j, g in enumerate(gap_polys):
            for mono, c in g.items():
                rows.append(index[mono])
                cols.append(j)
                vals.append(-c)
        gmat = sp.csr_matrix((vals, (rows, cols)), shape=(len(index), n_b))
        return gmat @ b + unit(index) * gamma

    add_family(spec.safe_boxes, max(p_gap, spec.m), safe_lhs)

    objective = cp.Minimize(eta + spec.horizon * gamma)
    problem = cp.Problem(objective, constraints)
    return SosModel(problem=problem, b=b, eta=eta, gamma=gamma,
                    b_monomials=mon_b, gram_blocks=blocks,
                    meta={"equality_rows": equality_rows,
                          "m": spec.m, "m_lambda": spec.m_lambda,
                          "horizon": spec.horizon, "problem": spec.name})


def padd_neg(a: Poly, mono: tuple) -> Poly:
    """a(x) - x^mono."""
    out = dict(a)
    out[mono] = out.get(mono, 0.0) - 1.0
    if out[mono] == 0.0:
        del out[mono]
    return out


@dataclass(frozen=True)
class SosCertificate:
    """Barrier, levels and multiplier blocks from one SDP solve."""

    b_poly: Poly
    m: int
    dim: int
    eta: float
    gamma: float
    horizon: int
    delta_s: float
    multiplier_blocks: list
    meta: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "b": {
                "arity": self.dim,
                "max_degree": self.m,
                "coeffs": poly_to_dense(self.b_poly, self.dim, self.m),
            },
            "eta": self.eta,
            "gamma": self.gamma,
            "horizon": self.horizon,
            "delta_s": self.delta_s,
            "meta": self.meta,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def solve_sos(spec: SosProblem, solver: str = "CLARABEL",
              warn_degree: int = 28) -> SosCertificate:
    """Build and solve; returns the certificate with provenance metadata."""
    if spec.m_lambda >= warn_degree:
        print(f"warning: multiplier degree {spec.m_lambda} is in the range "
              "where numerical instability has been observed")
    t0 = time.perf_counter()
    model = build_sos_program(spec)
    try:
        model.problem.solve(solver=solver)
    except cp.SolverError as exc:
        raise SosError(f"SDP solver failed: {exc}") from exc
    wall = time.perf_counter() - t0
    status = model.problem.status
    if status not in ("optimal", "optimal_inaccurate"):
        raise SosError(f"SDP solve ended with status {status}")
    eta = float(min(1.0, max(0.0, model.eta.value)))
    gamma = float(min(1.0, max(0.0, model.gamma.value)))
    delta_s = float(min(1.0, max(0.0, 1.0 - (eta + spec.horizon * gamma))))
    b_poly = {mono: float(v)
              for mono, v in zip(model.b_monomials, model.b.value)
              if abs(v) > 0.0}
    multipliers = [np.asarray(q.value) for q in model.gram_blocks]
    meta = {
        **model.meta,
        "method": "sos",
        "degree_form": "cumulative",
        "solver": solver,
        "solver_status": status,
        "wall_time_s": wall,
        "variables": model.n_scalar_variables,
        "constraints": model.n_equalities,
        "objective": eta + spec.horizon * gamma,
    }
    return SosCertificate(b_poly=b_poly, m=spec.m, dim=spec.dim, eta=eta,
                          gamma=gamma, horizon=spec.horizon, delta_s=delta_s,
                          multiplier_blocks=multipliers, meta=meta)

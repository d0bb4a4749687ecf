"""Assembly and solution of the barrier-synthesis linear program.

Decision variables are the barrier coefficients b plus the scalars eta
(initial-set level) and gamma (expected one-step increase level).  For every
rectangle of every family, the region is pulled back to the unit box, the
relevant polynomial (the barrier itself, or its expected one-step increase)
is converted to Bernstein coefficients at a raised degree, and each
coefficient becomes one inequality row:

    domain rectangles:   coeffs(B)           >= 0
    unsafe rectangles:   coeffs(B)           >= 1
    initial rectangles:  coeffs(B)           <= eta
    safe rectangles:     coeffs(E[B o f+v] - B) <= gamma

Minimizing eta + K*gamma then maximizes the certified safety level
delta_s = 1 - (eta + K*gamma).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .bernstein import phi_1d
from .expectation import dynamics_matrix, gamma_expect, gap_matrix
from .polyalg import MultiPoly, apply_separable, cumulative_mask, kron_all
from .problems import Problem
from .regions import HyperRect, RegionPartition, affine_factors

KINDS = ("domain", "unsafe", "init", "safe")


class SynthesisError(RuntimeError):
    """Assembly or solver failure with a diagnostic message."""


class InfeasibleProblem(SynthesisError):
    """The assembled LP admits no barrier (should not occur: B=1 is feasible)."""


@dataclass(frozen=True)
class SynthesisConfig:
    """Relaxation knobs for one synthesis run.

    m_plus / p_plus default to the minimum admissible degrees (m and the
    composed degree p); kappa uniformly subdivides every rectangle of every
    family into kappa^D children before the transforms are built.
    """

    m: int
    m_plus: int | None = None
    p_plus: int | None = None
    kappa: int = 1
    horizon: int | None = None
    degree_form: str = "maximal"  # or "cumulative"
    max_constraints: int | None = None
    coeff_bound: float | None = None

    def __post_init__(self):
        if self.m < 0 or self.kappa < 1:
            raise ValueError("need m >= 0 and kappa >= 1")
        if self.degree_form not in ("maximal", "cumulative"):
            raise ValueError(f"unknown degree form {self.degree_form!r}")
        if self.m_plus is not None and self.m_plus < self.m:
            raise ValueError("m_plus must be >= m")


@dataclass(frozen=True)
class ConstraintBlock:
    """Rows A b >= const + eta_coeff*eta + gamma_coeff*gamma for one region."""

    region: HyperRect
    kind: str
    A: np.ndarray
    eta_coeff: float
    gamma_coeff: float
    const: float

    def slack(self, b: np.ndarray, eta: float, gamma: float) -> np.ndarray:
        rhs = self.const + self.eta_coeff * eta + self.gamma_coeff * gamma
        return self.A @ b - rhs


@dataclass
class LinearProgram:
    """Assembled LP: minimize c^T w s.t. G w >= rhs plus box bounds.

    w = (b restricted to the kept template indices, eta, gamma).
    """

    G: sp.csr_matrix
    rhs: np.ndarray
    c: np.ndarray
    bounds: list
    blocks: list = field(repr=False, default_factory=list)
    kept: np.ndarray | None = None  # bool mask over the full b tensor
    meta: dict = field(default_factory=dict)

    @property
    def n_variables(self) -> int:
        return self.G.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "failed"
    objective: float | None
    w: np.ndarray | None
    message: str = ""


@dataclass(frozen=True)
class Certificate:
    """A synthesized barrier with its safety level and provenance."""

    b: MultiPoly
    eta: float
    gamma: float
    horizon: int
    delta_s: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "b": self.b.to_dict(),
            "eta": self.eta,
            "gamma": self.gamma,
            "horizon": self.horizon,
            "delta_s": self.delta_s,
            "meta": self.meta,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @staticmethod
    def from_dict(d: dict) -> "Certificate":
        return Certificate(
            b=MultiPoly.from_dict(d["b"]),
            eta=float(d["eta"]),
            gamma=float(d["gamma"]),
            horizon=int(d["horizon"]),
            delta_s=float(d["delta_s"]),
            meta=dict(d.get("meta", {})),
        )

    @staticmethod
    def load(path) -> "Certificate":
        with open(path) as fh:
            return Certificate.from_dict(json.load(fh))


def safety_level(eta: float, gamma: float, horizon: int) -> float:
    """Certified lower bound 1 - (eta + K*gamma), clipped into [0, 1]."""
    return float(min(1.0, max(0.0, 1.0 - (eta + horizon * gamma))))


def resolved_degrees(dynamics, cfg: SynthesisConfig) -> tuple[int, int, int, int]:
    """(m, m_plus, p, p_plus) with defaults filled in and validated."""
    m = cfg.m
    m_plus = cfg.m_plus if cfg.m_plus is not None else m
    p = dynamics.composed_degree(m)
    p_plus = cfg.p_plus if cfg.p_plus is not None else p
    if m_plus < m:
        raise ValueError("m_plus must be >= m")
    if p_plus < p:
        raise ValueError(f"p_plus must be >= composed degree {p}")
    return m, m_plus, p, p_plus


def lp_size(partition: RegionPartition, dynamics, cfg: SynthesisConfig
            ) -> tuple[int, int]:
    """Analytic (M, C): variable and constraint counts for a configuration."""
    m, m_plus, p, p_plus = resolved_degrees(dynamics, cfg)
    d = partition.dim
    q, qs, qu, q0 = partition.counts()
    mul = cfg.kappa ** d
    rows = (q + qu + q0) * mul * (m_plus + 1) ** d + qs * mul * (p_plus + 1) ** d
    if cfg.degree_form == "cumulative":
        n_b = len(cumulative_mask(m, d).kept_indices)
    else:
        n_b = (m + 1) ** d
    return n_b + 2, rows


def region_block(kind: str, rect: HyperRect, m: int, m_plus: int,
                 p: int, p_plus: int, gap: np.ndarray) -> ConstraintBlock:
    """Constraint rows for one rectangle of one family."""
    d = rect.dim
    if kind in ("domain", "unsafe", "init"):
        mats = [phi_1d(m, m_plus) @ a for a in affine_factors(rect, m)]
        rows = kron_all(mats)
        if kind == "domain":
            return ConstraintBlock(rect, kind, rows, 0.0, 0.0, 0.0)
        if kind == "unsafe":
            return ConstraintBlock(rect, kind, rows, 0.0, 0.0, 1.0)
        return ConstraintBlock(rect, kind, -rows, -1.0, 0.0, 0.0)
    if kind == "safe":
        mats = [phi_1d(p, p_plus) @ a for a in affine_factors(rect, p)]
        tens = gap.reshape((p + 1,) * d + (gap.shape[1],))
        rows = apply_separable(mats, tens).reshape(-1, gap.shape[1])
        return ConstraintBlock(rect, kind, -rows, 0.0, -1.0, 0.0)
    raise ValueError(f"unknown constraint kind {kind!r}")


def build_blocks(partition: RegionPartition, dynamics, noise_moments,
                 cfg: SynthesisConfig) -> tuple[list[ConstraintBlock], dict]:
    """All constraint blocks in canonical family/region order."""
    m, m_plus, p, p_plus = resolved_degrees(dynamics, cfg)
    d = partition.dim
    F = dynamics_matrix(dynamics, m)
    eg = gamma_expect(noise_moments, m, d)
    gap = gap_matrix(F, eg, m, p, d)
    families = (("domain", partition.domain_rects),
                ("unsafe", partition.unsafe_rects),
                ("init", partition.init_rects),
                ("safe", partition.safe_rects))
    blocks = []
    for kind, rects in families:
        for rect in rects:
            for child in rect.subdivide(cfg.kappa):
                blocks.append(region_block(kind, child, m, m_plus, p, p_plus,
                                           gap))
    degrees = {"m": m, "m_plus": m_plus, "p": p, "p_plus": p_plus}
    return blocks, degrees


def assemble(problem: Problem, cfg: SynthesisConfig,
             partition: RegionPartition | None = None) -> LinearProgram:
    """Build the synthesis LP for a problem under the given configuration."""
    part = partition if partition is not None else problem.partition
    m, m_plus, p, p_plus = resolved_degrees(problem.dynamics, cfg)
    mvars, rows_expected = lp_size(part, problem.dynamics, cfg)
    if cfg.max_constraints is not None and rows_expected > cfg.max_constraints:
        raise SynthesisError(
            f"refusing to assemble {rows_expected} constraints "
            f"(--max-constraints {cfg.max_constraints})")
    moments = problem.noise.moments(m)
    blocks, degrees = build_blocks(part, problem.dynamics, moments, cfg)

    d = part.dim
    n_b_full = (m + 1) ** d
    if cfg.degree_form == "cumulative":
        kept = cumulative_mask(m, d).flat_mask()
    else:
        kept = np.ones(n_b_full, dtype=bool)
    n_b = int(kept.sum())

    g_parts, rhs_parts = [], []
    for blk in blocks:
        a = blk.A[:, kept]
        extra = np.zeros((a.shape[0], 2))
        extra[:, 0] = -blk.eta_coeff
        extra[:, 1] = -blk.gamma_coeff
        g_parts.append(sp.csr_matrix(np.hstack([a, extra])))
        rhs_parts.append(np.full(a.shape[0], blk.const))
    G = sp.vstack(g_parts, format="csr")
    rhs = np.concatenate(rhs_parts)

    horizon = cfg.horizon if cfg.horizon is not None else problem.horizon
    c = np.zeros(n_b + 2)
    c[-2] = 1.0
    c[-1] = float(horizon)
    if cfg.coeff_bound is not None:
        b_bounds = [(-cfg.coeff_bound, cfg.coeff_bound)] * n_b
    else:
        b_bounds = [(None, None)] * n_b
    bounds = b_bounds + [(0.0, 1.0), (0.0, 1.0)]

    lp = LinearProgram(G=G, rhs=rhs, c=c, bounds=bounds, blocks=blocks,
                       kept=kept,
                       meta={**degrees, "kappa": cfg.kappa,
                             "degree_form": cfg.degree_form,
                             "horizon": horizon,
                             "region_counts": part.counts(),
                             "problem": problem.name})
    assert lp.n_constraints == rows_expected and lp.n_variables == mvars
    return lp


def solve(lp: LinearProgram) -> LpSolution:
    """Solve an assembled LP with the HiGHS back-end (deterministic)."""
    res = linprog(lp.c, A_ub=(-lp.G).tocsr(), b_ub=-lp.rhs,
                  bounds=lp.bounds, method="highs")
    if res.status == 0:
        return LpSolution("optimal", float(res.fun), np.asarray(res.x),
                          res.message)
    if res.status == 2:
        return LpSolution("infeasible", None, None, res.message)
    if res.status == 3:
        return LpSolution("unbounded", None, None, res.message)
    return LpSolution("failed", None, None, res.message)


def _repair_solution(lp: LinearProgram, b: np.ndarray, eta: float,
                     gamma: float) -> tuple[np.ndarray, float, float, float]:
    """Restore exact feasibility of a solver solution within our own bounds.

    LP solvers honor feasibility tolerances relative to their internal
    scaling, so solutions with large barrier coefficients can violate the
    assembled rows by more than the post-hoc margin tolerance.  Measuring
    the worst deficit per family lets us repair algebraically: adding d0
    lifts the domain rows, dividing by s = 1 + d0 - du restores the unsafe
    level (the constant shift cancels exactly in the martingale gap, and
    scaling divides it), and eta/gamma absorb their own deficits.  The cost
    is an O(deficit) loss in the certified level.
    """
    deficits = {kind: 0.0 for kind in KINDS}
    for blk in lp.blocks:
        worst = float(np.min(blk.slack(b, eta, gamma)))
        deficits[blk.kind] = max(deficits[blk.kind], -worst)
    # pad a measured deficit by the row-evaluation error bound; exactly
    # feasible solutions (all deficits zero) are left untouched
    pad = 64 * b.size * np.finfo(float).eps * (1.0 + float(np.max(np.abs(b))))
    d0, du, de, dg = (deficits[k] + pad if deficits[k] > 0 else 0.0
                      for k in ("domain", "unsafe", "init", "safe"))
    s = 1.0 + d0 - du
    if s <= 0.5:
        raise SynthesisError(
            f"solver solution too inaccurate to repair (unsafe deficit {du:.3g})")
    b_new = b.copy()
    b_new[0] += d0
    b_new /= s
    return b_new, (eta + de + d0) / s, (gamma + dg) / s, d0 + du + de + dg


def _vacuous_certificate(m: int, arity: int) -> tuple[np.ndarray, float, float]:
    """B = 1, eta = 1, gamma = 0: always feasible, certifies level zero."""
    b = np.zeros((m + 1) ** arity)
    b[0] = 1.0
    return b, 1.0, 0.0


def synthesize(problem: Problem, cfg: SynthesisConfig,
               partition: RegionPartition | None = None) -> Certificate:
    """Assemble and solve, returning the safety certificate.

    The raw solver solution is repaired to exact feasibility against the
    assembled bounds (see :func:`_repair_solution`); when nothing can be
    certified the canonical vacuous certificate is returned instead.
    Raises :class:`InfeasibleProblem` / :class:`SynthesisError` when the
    solver reports no solution, carrying the solver diagnostic.
    """
    t0 = time.perf_counter()
    lp = assemble(problem, cfg, partition=partition)
    sol = solve(lp)
    wall = time.perf_counter() - t0
    if sol.status == "infeasible":
        raise InfeasibleProblem(f"LP infeasible: {sol.message}")
    if sol.status != "optimal":
        raise SynthesisError(f"LP solve {sol.status}: {sol.message}")
    m = lp.meta["m"]
    d = len(problem.partition.domain_rects[0].lo)
    b_full = np.zeros((m + 1) ** d)
    b_full[lp.kept] = sol.w[:-2]
    eta_raw = float(min(1.0, max(0.0, sol.w[-2])))
    gamma_raw = float(min(1.0, max(0.0, sol.w[-1])))
    horizon = lp.meta["horizon"]
    b_fix, eta, gamma, repair = _repair_solution(lp, b_full, eta_raw,
                                                 gamma_raw)
    if 1.0 - (eta + horizon * gamma) <= 0.0:
        b_fix, eta, gamma = _vacuous_certificate(m, d)
    meta = {
        **lp.meta,
        "objective": eta + horizon * gamma,
        "solver_objective": sol.objective,
        "repair": repair,
        "solver_status": sol.status,
        "wall_time_s": wall,
        "variables": lp.n_variables,
        "constraints": lp.n_constraints,
    }
    return Certificate(
        b=MultiPoly.from_flat(b_fix, d, m),
        eta=eta,
        gamma=gamma,
        horizon=horizon,
        delta_s=safety_level(eta, gamma, horizon),
        meta=meta,
    )


def export_lp_text(lp: LinearProgram, name: str = "barrier") -> str:
    """Render the LP in the fixed-format CPLEX LP text interchange format.

    Variables are named b0..b{n-1}, eta, gamma; rows r0..; suitable for
    feeding to external LP solvers for cross-checking.
    """
    n_b = lp.n_variables - 2
    names = [f"b{i}" for i in range(n_b)] + ["eta", "gamma"]
    out = [f"\\ Problem: {name}", "Minimize"]
    obj = " + ".join(f"{lp.c[i]:.17g} {names[i]}"
                     for i in range(len(names)) if lp.c[i] != 0)
    out.append(f" obj: {obj if obj else '0 eta'}")
    out.append("Subject To")
    G = lp.G.tocsr()
    for r in range(G.shape[0]):
        row = G.getrow(r)
        terms = []
        for idx, val in zip(row.indices, row.data):
            terms.append(f"{'+' if val >= 0 else '-'} {abs(val):.17g} {names[idx]}")
        expr = " ".join(terms).lstrip("+ ")
        out.append(f" r{r}: {expr} >= {lp.rhs[r]:.17g}")
    out.append("Bounds")
    for i in range(n_b):
        lo, hi = lp.bounds[i]
        if lo is None and hi is None:
            out.append(f" {names[i]} free")
        else:
            out.append(f" {lo:.17g} <= {names[i]} <= {hi:.17g}")
    out.append(" 0 <= eta <= 1")
    out.append(" 0 <= gamma <= 1")
    out.append("End")
    return "\n".join(out) + "\n"

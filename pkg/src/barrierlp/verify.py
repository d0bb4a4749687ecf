"""Post-hoc certificate checking and empirical safety estimation.

Three complementary checks:

* ``sound_check`` re-derives every Bernstein lower bound at settings at
  least as tight as the synthesis used.  Because the bounds tighten
  monotonically in degree and subdivision, a pass re-confirms the
  certificate; it can never manufacture a false violation out of coarseness.
* ``grid_falsify`` samples the barrier (and its expected one-step increase)
  on dense grids.  A violation refutes the certificate; a pass proves
  nothing on its own.
* ``monte_carlo_safety`` simulates trajectories and estimates the actual
  safety probability, which must dominate the certified level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expectation import dynamics_matrix, expected_composition, gamma_expect
from .polyalg import MultiPoly
from .problems import Problem
from .synthesis import Certificate, SynthesisConfig, build_blocks

FAMILIES = ("domain", "unsafe", "init", "safe")

SOUND_TOL = 1e-6
GRID_TOL = 1e-6


@dataclass(frozen=True)
class VerificationReport:
    """Worst margin per constraint family; nonnegative margins pass."""

    method: str  # "sound-bernstein" | "grid-sample"
    margins: dict
    passed: bool
    tolerance: float
    detail: dict = field(default_factory=dict)

    def worst(self) -> float:
        return min(self.margins.values())

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "margins": self.margins,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def sound_check(cert: Certificate, problem: Problem,
                m_check: int | None = None, kappa_check: int | None = None,
                tol: float = SOUND_TOL) -> VerificationReport:
    """Re-derive all Bernstein bounds at an at-least-as-tight setting.

    ``m_check`` raises the conversion degree used for the barrier-level
    families (the martingale family is raised by the same amount above its
    composed degree); ``kappa_check`` refines the uniform subdivision.
    Both default to the certificate's own synthesis settings.
    """
    meta = cert.meta
    m = cert.b.max_degree
    m_plus_used = int(meta.get("m_plus", m))
    kappa_used = int(meta.get("kappa", 1))
    if m_check is None:
        m_check = m_plus_used
    if kappa_check is None:
        kappa_check = kappa_used
    if m_check < m_plus_used or kappa_check < kappa_used:
        raise ValueError("checking parameters must be at least as tight as "
                         "the synthesis parameters")
    p = problem.dynamics.composed_degree(m)
    p_plus_used = int(meta.get("p_plus", p))
    cfg = SynthesisConfig(m=m, m_plus=m_check, kappa=kappa_check,
                          p_plus=p_plus_used + (m_check - m_plus_used))
    moments = problem.noise.moments(m)
    blocks, _ = build_blocks(problem.partition, problem.dynamics, moments, cfg)
    margins = {fam: math.inf for fam in FAMILIES}
    for blk in blocks:
        kind = blk.kind
        slack = float(np.min(blk.slack(cert.b.flat, cert.eta, cert.gamma)))
        margins[kind] = min(margins[kind], slack)
    if not problem.partition.unsafe_rects:
        margins["unsafe"] = math.inf
    passed = all(v >= -tol for v in margins.values())
    return VerificationReport(method="sound-bernstein", margins=margins,
                              passed=passed, tolerance=tol,
                              detail={"m_check": m_check,
                                      "kappa_check": kappa_check})


def grid_falsify(cert: Certificate, problem: Problem,
                 points_per_dim: int = 50,
                 tol: float = GRID_TOL) -> VerificationReport:
    """Search uniform per-region grids (corners included) for violations.

    Margins are the worst pointwise slacks of the four barrier conditions;
    a negative margin beyond tolerance refutes the certificate.
    """
    if points_per_dim < 2:
        raise ValueError("need at least 2 grid points per dimension")
    part = problem.partition
    b = cert.b
    m = b.max_degree
    d = problem.dim
    moments = problem.noise.moments(m)
    F = dynamics_matrix(problem.dynamics, m)
    eg = gamma_expect(moments, m, d)
    p = problem.dynamics.composed_degree(m)
    composed = MultiPoly.from_flat(expected_composition(F, eg, b.flat), d, p)

    b_scale = 1.0
    margins = {}
    worst_points = {}

    def family_margin(rects, score_fn):
        nonlocal b_scale
        worst, worst_x = math.inf, None
        for rect in rects:
            pts = rect.grid(points_per_dim)
            vals_b = b(pts)
            b_scale = max(b_scale, float(np.max(np.abs(vals_b))))
            scores = score_fn(pts, vals_b)
            i = int(np.argmin(scores))
            if scores[i] < worst:
                worst, worst_x = float(scores[i]), pts[i].tolist()
        return worst, worst_x

    margins["domain"], worst_points["domain"] = family_margin(
        part.domain_rects, lambda pts, vb: vb)
    if part.unsafe_rects:
        margins["unsafe"], worst_points["unsafe"] = family_margin(
            part.unsafe_rects, lambda pts, vb: vb - 1.0)
    else:
        margins["unsafe"], worst_points["unsafe"] = math.inf, None
    margins["init"], worst_points["init"] = family_margin(
        part.init_rects, lambda pts, vb: cert.eta - vb)
    margins["safe"], worst_points["safe"] = family_margin(
        part.safe_rects, lambda pts, vb: cert.gamma - (composed(pts) - vb))

    scaled_tol = tol * (1.0 + b_scale)
    passed = all(v >= -scaled_tol for v in margins.values())
    return VerificationReport(method="grid-sample", margins=margins,
                              passed=passed, tolerance=scaled_tol,
                              detail={"points_per_dim": points_per_dim,
                                      "worst_points": worst_points})


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Worst empirical staying-safe frequency over the sampled start points."""

    probability: float
    half_width: float  # 95% binomial confidence half-width at the worst start
    trials_per_start: int
    n_starts: int
    horizon: int

    def lower_confidence(self) -> float:
        return self.probability - self.half_width


def monte_carlo_safety(problem: Problem, horizon: int | None = None,
                       trials: int = 10_000, seed: int = 0,
                       draws_per_rect: int = 64) -> MonteCarloEstimate:
    """Simulate trajectories from the initial set and count safe runs.

    Start points are uniform draws plus every corner of each initial
    rectangle; the reported probability is the minimum frequency over start
    points of staying inside the safe family for every step up to the
    horizon.  Requires sample-able (Gaussian) noise.
    """
    if horizon is None:
        horizon = problem.horizon
    if problem.noise.kind != "gaussian":
        raise ValueError("only Gaussian noise can be simulated; moment-table "
                         "noise supports synthesis and checking only")
    rng = np.random.default_rng(seed)
    part = problem.partition
    starts = []
    for rect in part.init_rects:
        starts.append(rect.corners())
        starts.append(rect.sample(draws_per_rect, rng))
    starts = np.vstack(starts)
    n_starts = starts.shape[0]
    n_per = max(1, trials // n_starts)

    def in_safe(x):
        ok = np.zeros(x.shape[0], dtype=bool)
        for rect in part.safe_rects:
            ok |= rect.contains(x, tol=1e-12)
        return ok

    worst_p, worst_hw = 2.0, 0.0
    for s in starts:
        x = np.tile(s, (n_per, 1))
        alive = in_safe(x)
        for _ in range(horizon):
            x = problem.dynamics.step(x) + problem.noise.sample(n_per, rng)
            alive &= in_safe(x)
        p_hat = float(np.mean(alive))
        hw = 1.96 * math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n_per)
        if p_hat < worst_p:
            worst_p, worst_hw = p_hat, hw
    return MonteCarloEstimate(probability=worst_p, half_width=worst_hw,
                              trials_per_start=n_per, n_starts=n_starts,
                              horizon=horizon)

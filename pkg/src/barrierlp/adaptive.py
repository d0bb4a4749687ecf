"""Adaptive subdivision: spend the constraint budget where bounds bind.

Uniform subdivision multiplies every region by kappa^D, most of which buys
nothing.  Given a heuristic certificate from a coarse solve, each rectangle
gets a robustness score (the smallest slack of its assembled constraint rows
under that certificate); a best-first search repeatedly halves the
worst-scoring rectangle along each dimension, keeping the encountered node
with the largest worst-case robustness whose constraint count fits the
budget.  The returned families then seed a tighter LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problems import Problem
from .regions import HyperRect, RegionPartition
from .synthesis import (Certificate, SynthesisConfig, region_block,
                        resolved_degrees, synthesize)

KIND_ORDER = ("domain", "unsafe", "init", "safe")


@dataclass(frozen=True)
class Node:
    """One candidate partitioning of the four rectangle families."""

    domain: tuple
    unsafe: tuple
    init: tuple
    safe: tuple

    @staticmethod
    def from_partition(part: RegionPartition) -> "Node":
        return Node(domain=tuple(part.domain_rects),
                    unsafe=tuple(part.unsafe_rects),
                    init=tuple(part.init_rects),
                    safe=tuple(part.safe_rects))

    def to_partition(self) -> RegionPartition:
        return RegionPartition(domain_rects=list(self.domain),
                               safe_rects=list(self.safe),
                               unsafe_rects=list(self.unsafe),
                               init_rects=list(self.init))

    def family(self, kind: str) -> tuple:
        return {"domain": self.domain, "unsafe": self.unsafe,
                "init": self.init, "safe": self.safe}[kind]

    def members(self):
        """(kind, index, rect) triples in canonical order."""
        for kind in KIND_ORDER:
            for i, rect in enumerate(self.family(kind)):
                yield kind, i, rect

    def fingerprint(self) -> tuple:
        return tuple(sorted((kind, rect.key())
                            for kind, _, rect in self.members()))

    def constraint_count(self, dynamics, cfg: SynthesisConfig) -> int:
        m, m_plus, p, p_plus = resolved_degrees(dynamics, cfg)
        d = self.domain[0].dim
        n_abc = len(self.domain) + len(self.unsafe) + len(self.init)
        return n_abc * (m_plus + 1) ** d + len(self.safe) * (p_plus + 1) ** d


class _RowCache:
    """Constraint matrices per (kind, rect), built lazily from the problem."""

    def __init__(self, problem: Problem, cfg: SynthesisConfig):
        from .expectation import dynamics_matrix, gamma_expect, gap_matrix

        self.degrees = resolved_degrees(problem.dynamics, cfg)
        m = self.degrees[0]
        d = problem.dim
        moments = problem.noise.moments(m)
        F = dynamics_matrix(problem.dynamics, m)
        eg = gamma_expect(moments, m, d)
        self.gap = gap_matrix(F, eg, m, self.degrees[2], d)
        self._blocks: dict = {}

    def block(self, kind: str, rect: HyperRect):
        key = (kind, rect.key())
        if key not in self._blocks:
            m, m_plus, p, p_plus = self.degrees
            self._blocks[key] = region_block(kind, rect, m, m_plus, p, p_plus,
                                             self.gap)
        return self._blocks[key]


def robustness(S: HyperRect, kind: str, cert: Certificate,
               problem: Problem, cfg: SynthesisConfig,
               _cache: _RowCache | None = None) -> float:
    """Minimum slack of the rectangle's constraint rows under a certificate.

    Zero means some row is active (the certificate is pinned by this
    region); positive values measure how much the region could be loosened.
    """
    if kind not in KIND_ORDER:
        raise ValueError(f"unknown constraint kind {kind!r}")
    cache = _cache if _cache is not None else _RowCache(problem, cfg)
    blk = cache.block(kind, S)
    return float(np.min(blk.slack(cert.b.flat, cert.eta, cert.gamma)))


def split(node: Node, S: HyperRect, dim: int) -> Node:
    """Replace S by its two halves at the midpoint along one dimension."""
    key = S.key()
    for kind in KIND_ORDER:
        fam = node.family(kind)
        for i, rect in enumerate(fam):
            if rect.key() == key:
                halves = rect.split(dim)
                new_fam = fam[:i] + tuple(halves) + fam[i + 1:]
                return Node(**{k: (new_fam if k == kind else node.family(k))
                               for k in KIND_ORDER})
    raise ValueError("rectangle to split not found in any family")


@dataclass
class SearchState:
    """Best-first search bookkeeping over encountered nodes."""

    budget: int
    entries: list = field(default_factory=list)  # (score, counter, node, count)
    seen: set = field(default_factory=set)
    expanded: set = field(default_factory=set)
    counter: int = 0

    def add(self, node: Node, score: float, count: int) -> bool:
        fp = node.fingerprint()
        if fp in self.seen:
            return False
        self.seen.add(fp)
        self.entries.append((score, self.counter, node, count))
        self.counter += 1
        return True

    def best(self, within_budget: bool = True, unexpanded: bool = False):
        """Highest (score, insertion counter) entry, optionally filtered."""
        pool = self.entries
        if within_budget:
            pool = [e for e in pool if e[3] <= self.budget]
        if unexpanded:
            pool = [e for e in pool if e[2].fingerprint() not in self.expanded]
        if not pool:
            return None
        return max(pool, key=lambda e: (e[0], e[1]))


def _node_score(node: Node, cert: Certificate, problem: Problem,
                cfg: SynthesisConfig, cache: _RowCache):
    """(min robustness, argmin member) over all rectangles of the node."""
    best_val, best_member = np.inf, None
    for kind, i, rect in node.members():
        val = robustness(rect, kind, cert, problem, cfg, _cache=cache)
        if val < best_val - 1e-15:
            best_val, best_member = val, (kind, i, rect)
    return best_val, best_member


def adaptive_subdivide(root: Node | RegionPartition, cert: Certificate,
                       c_max: int, problem: Problem,
                       cfg: SynthesisConfig) -> Node:
    """Best-first subdivision search under a constraint budget.

    Returns the encountered node with the largest minimum robustness among
    those whose constraint count is at most c_max.  Each expansion halves
    the current best node's minimum-robustness rectangle along every
    dimension (ties broken toward the lowest canonical region index, and
    among equal scores toward the most recently encountered node, which
    guarantees progress because halving never lowers the minimum).
    """
    if isinstance(root, RegionPartition):
        root = Node.from_partition(root)
    cache = _RowCache(problem, cfg)
    root_count = root.constraint_count(problem.dynamics, cfg)
    if root_count > c_max:
        raise ValueError(
            f"budget {c_max} below the root constraint count {root_count}")
    state = SearchState(budget=c_max)
    score, _ = _node_score(root, cert, problem, cfg, cache)
    state.add(root, score, root_count)
    dims = root.domain[0].dim
    while True:
        entry = state.best(within_budget=True, unexpanded=True)
        if entry is None:
            break
        score, _, node, count = entry
        if count >= c_max:
            break
        state.expanded.add(node.fingerprint())
        _, member = _node_score(node, cert, problem, cfg, cache)
        if member is None:
            break
        _, _, worst_rect = member
        for dim in range(dims):
            child = split(node, worst_rect, dim)
            child_score, _ = _node_score(child, cert, problem, cfg, cache)
            state.add(child, child_score,
                      child.constraint_count(problem.dynamics, cfg))
    best = state.best(within_budget=True)
    return best[2]


def refine_loop(problem: Problem, cfg: SynthesisConfig, rounds: int,
                c_max: int | None = None) -> Certificate:
    """Alternate synthesis and adaptive subdivision; keep the best round.

    Round one solves the problem as configured (falling back to a uniform
    kappa=2 subdivision if the coarse LP were ever reported infeasible).
    Later rounds re-partition under the freshest certificate and re-solve
    with the adapted families.  Returns the certificate with the largest
    safety level seen across rounds.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    from dataclasses import replace

    from .synthesis import InfeasibleProblem

    try:
        cert = synthesize(problem, cfg)
    except InfeasibleProblem:
        cfg = replace(cfg, kappa=max(2, cfg.kappa))
        cert = synthesize(problem, cfg)
    if c_max is None:
        c_max = 4 * cert.meta["constraints"]
    best = cert
    node = Node.from_partition(problem.partition)
    flat_cfg = replace(cfg, kappa=1)
    for _ in range(rounds - 1):
        node = adaptive_subdivide(node, cert, c_max, problem, flat_cfg)
        cert = synthesize(problem, flat_cfg, partition=node.to_partition())
        if cert.delta_s > best.delta_s:
            best = cert
    meta = dict(best.meta)
    meta["rounds"] = rounds
    meta["c_max"] = c_max
    return Certificate(b=best.b, eta=best.eta, gamma=best.gamma,
                       horizon=best.horizon, delta_s=best.delta_s, meta=meta)

"""Sparse multivariate polynomials and the problem geometry for the SoS lane.

Polynomials are dictionaries mapping exponent tuples to float coefficients,
which keeps the cumulative-degree bookkeeping natural for sum-of-squares
templates.  This module also carries the small amount of rectangle geometry
needed to read the shared problem-file schema (boundary frame, safe cover).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

Poly = dict  # exponent tuple -> float


def pzero() -> Poly:
    return {}


def pconst(c: float, dim: int) -> Poly:
    return {(0,) * dim: float(c)} if c != 0 else {}


def pvar(j: int, dim: int) -> Poly:
    e = [0] * dim
    e[j] = 1
    return {tuple(e): 1.0}


def padd(a: Poly, b: Poly, scale: float = 1.0) -> Poly:
    out = dict(a)
    for mono, c in b.items():
        out[mono] = out.get(mono, 0.0) + scale * c
        if out[mono] == 0.0:
            del out[mono]
    return out


def pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = tuple(x + y for x, y in zip(ma, mb))
            out[mono] = out.get(mono, 0.0) + ca * cb
    return {m: c for m, c in out.items() if c != 0.0}


def ppow(a: Poly, k: int) -> Poly:
    dim = len(next(iter(a))) if a else 1
    out = pconst(1.0, dim)
    for _ in range(k):
        out = pmul(out, a)
    return out


def pdeg(a: Poly) -> int:
    return max((sum(m) for m in a), default=0)


def peval(a: Poly, x) -> float | np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape[0])
    for mono, c in a.items():
        term = np.full(x.shape[0], c)
        for j, e in enumerate(mono):
            if e:
                term = term * x[:, j] ** e
        out += term
    return out if out.size > 1 else float(out[0])


def monomials_upto(dim: int, degree: int) -> list[tuple]:
    """All exponent tuples with total degree <= degree, graded lexicographic."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            e = [0] * dim
            for j in combo:
                e[j] += 1
            out.append(tuple(e))
    # deduplicate while keeping graded order
    seen, uniq = set(), []
    for e in out:
        if e not in seen:
            seen.add(e)
            uniq.append(e)
    return uniq


def binom(n: int, k: int) -> float:
    return float(math.comb(n, k))


def gaussian_moment_tables(sigma, kmax: int) -> list[np.ndarray]:
    """Raw moments of centered Gaussians per dimension, order 0..kmax."""
    tables = []
    for s in np.atleast_1d(np.asarray(sigma, dtype=float)):
        t = np.zeros(kmax + 1)
        t[0] = 1.0
        for k in range(2, kmax + 1, 2):
            t[k] = t[k - 2] * (k - 1) * s * s
        tables.append(t)
    return tables


def expected_step_monomial(exponents: tuple, dynamics: list[Poly],
                           moments: list[np.ndarray]) -> Poly:
    """Coefficients of E[prod_j (f_j(x) + v_j)^(l_j)] for one barrier monomial.

    Binomial expansion in the independent noise components: every mixed
    moment factors into the per-dimension tables.
    """
    dim = len(exponents)
    out = pzero()
    ranges = [range(l + 1) for l in exponents]
    f_powers = [[ppow(dynamics[j], i) for i in range(exponents[j] + 1)]
                for j in range(dim)]
    for picks in itertools.product(*ranges):
        weight = 1.0
        for j, (l, i) in enumerate(zip(exponents, picks)):
            weight *= binom(l, i) * moments[j][l - i]
        if weight == 0.0:
            continue
        term = pconst(weight, dim)
        for j, i in enumerate(picks):
            term = pmul(term, f_powers[j][i])
        out = padd(out, term)
    return out


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    @property
    def dim(self) -> int:
        return len(self.lo)

    def quadratics(self) -> list[Poly]:
        """Per-dimension set descriptions (x_j - lo_j)(hi_j - x_j) >= 0."""
        out = []
        for j in range(self.dim):
            lo, hi = self.lo[j], self.hi[j]
            # -x^2 + (lo + hi) x - lo*hi
            q = pzero()
            e2 = [0] * self.dim
            e2[j] = 2
            q[tuple(e2)] = -1.0
            e1 = [0] * self.dim
            e1[j] = 1
            q[tuple(e1)] = lo + hi
            q = padd(q, pconst(-lo * hi, self.dim))
            out.append(q)
        return out

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if all(a < b for a, b in zip(lo, hi)):
            return Box(lo, hi)
        return None

    def pad(self, margin: float) -> "Box":
        return Box(tuple(v - margin for v in self.lo),
                   tuple(v + margin for v in self.hi))


def subtract_box(piece: Box, hole: Box) -> list[Box]:
    inter = piece.intersect(hole)
    if inter is None:
        return [piece]
    out = []
    lo, hi = list(piece.lo), list(piece.hi)
    for d in range(piece.dim):
        if lo[d] < inter.lo[d]:
            hi_slab = list(hi)
            hi_slab[d] = inter.lo[d]
            out.append(Box(tuple(lo), tuple(hi_slab)))
            lo[d] = inter.lo[d]
        if inter.hi[d] < hi[d]:
            lo_slab = list(lo)
            lo_slab[d] = inter.hi[d]
            out.append(Box(tuple(lo_slab), tuple(hi)))
            hi[d] = inter.hi[d]
    return out


def cover_difference(outer: Box, holes: list[Box]) -> list[Box]:
    pieces = [outer]
    for hole in holes:
        pieces = [p for piece in pieces for p in subtract_box(piece, hole)]
    return pieces

"""Power-to-Bernstein conversion and certified range enclosures on [0, 1]^D.

The Bernstein coefficients of a polynomial at a raised degree enclose its
range over the unit box: the smallest coefficient never exceeds the true
infimum, and the bound tightens monotonically both when the representation
degree is raised and when the box is subdivided.  These two knobs are what
the synthesis layer turns to trade LP size against bound quality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .polyalg import MultiPoly, apply_separable, binomial_table, kron_all
from .regions import HyperRect

_phi_1d_cache: dict[tuple[int, int], np.ndarray] = {}
_phi_full_cache: dict[tuple[int, int, int], np.ndarray] = {}


def phi_1d(m: int, m_plus: int) -> np.ndarray:
    """One-dimensional power-to-Bernstein map of shape (m_plus+1) x (m+1).

    Entry (l, i) is C(l, i)/C(m_plus, i) for i <= l, zero otherwise; the
    Bernstein coefficients at degree m_plus of a degree-m polynomial with
    power coefficients b are ``phi_1d(m, m_plus) @ b``.
    """
    if m_plus < m:
        raise ValueError(f"raised degree {m_plus} < source degree {m}")
    key = (m, m_plus)
    if key not in _phi_1d_cache:
        bt = binomial_table(m_plus)
        mat = np.zeros((m_plus + 1, m + 1))
        for l in range(m_plus + 1):
            for i in range(min(l, m) + 1):
                mat[l, i] = bt[l, i] / bt[m_plus, i]
        _phi_1d_cache[key] = mat
    return _phi_1d_cache[key]


def phi_matrix(m: int, m_plus: int, arity: int) -> np.ndarray:
    """Full conversion map of shape (m_plus+1)^D x (m+1)^D, canonical order."""
    key = (m, m_plus, arity)
    if key not in _phi_full_cache:
        _phi_full_cache[key] = kron_all([phi_1d(m, m_plus)] * arity)
    return _phi_full_cache[key]


@dataclass(frozen=True)
class BernsteinCoeffs:
    """Bernstein coefficient tensor of shape (degree+1)^D on [0, 1]^D."""

    degree: int
    beta: np.ndarray

    @property
    def arity(self) -> int:
        return self.beta.ndim

    def __call__(self, x) -> np.ndarray | float:
        """Evaluate via the Bernstein basis (test oracle, not a hot path)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        n = self.degree
        bt = binomial_table(n)
        ks = np.arange(n + 1)
        out = np.broadcast_to(self.beta, (x.shape[0],) + self.beta.shape).copy()
        for d in range(self.arity):
            t = x[:, d][:, None]
            basis = bt[n, ks] * t**ks * (1 - t) ** (n - ks)  # (npts, n+1)
            out = np.einsum("nk...,nk->n...", out, basis)
        return float(out[0]) if single else out


@dataclass(frozen=True)
class Enclosure:
    """Certified range interval from Bernstein coefficients.

    ``lower`` is a sound lower bound of the polynomial's infimum over the
    unit box (and ``upper`` a sound upper bound of its supremum).
    ``gap_bound`` is the theoretical slack of the min-coefficient bound; it
    is not computed here and reported as +inf (soundness never uses it).
    """

    lower: float
    upper: float
    degree_used: int
    gap_bound: float = math.inf


def to_bernstein(p: MultiPoly, m_plus: int) -> BernsteinCoeffs:
    """Bernstein coefficients of p at degree m_plus (per dimension)."""
    mat = phi_1d(p.max_degree, m_plus)
    beta = apply_separable([mat] * p.arity, p.coeffs)
    return BernsteinCoeffs(degree=m_plus, beta=beta)


def lower_bound(beta: BernsteinCoeffs) -> float:
    """Smallest Bernstein coefficient: a sound lower bound over [0, 1]^D."""
    return float(beta.beta.min())


def enclosure(p: MultiPoly, m_plus: int) -> Enclosure:
    """Certified interval containing the range of p over the unit box.

    The upper side applies the min-coefficient bound to -p, which lands on
    the largest coefficient of p.
    """
    beta = to_bernstein(p, m_plus)
    return Enclosure(lower=float(beta.beta.min()),
                     upper=float(beta.beta.max()),
                     degree_used=m_plus)


def subdivide_unit_box(kappa: int, arity: int) -> list[HyperRect]:
    """Partition [0, 1]^D into kappa^D equal sub-boxes."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    unit = HyperRect(np.zeros(arity), np.ones(arity))
    return unit.subdivide(kappa)


def subdivided_lower_bound(p: MultiPoly, m_plus: int, kappa: int) -> float:
    """Min over sub-boxes of the per-box Bernstein lower bound on [0, 1]^D."""
    from .regions import transform_tensor  # local import avoids cycle at load

    mat = phi_1d(p.max_degree, m_plus)
    lo = math.inf
    for box in subdivide_unit_box(kappa, p.arity):
        local = transform_tensor(box, p.coeffs)
        beta = apply_separable([mat] * p.arity, local)
        lo = min(lo, float(beta.min()))
    return lo


def bernstein_basis_values(m: int, arity: int, x: np.ndarray) -> np.ndarray:
    """All basis polynomial values at points x, shape (npts, (m+1)^D).

    Columns follow the canonical coefficient order; used by tests to verify
    conversions pointwise.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    bt = binomial_table(m)
    ks = np.arange(m + 1)
    per_dim = []
    for d in range(arity):
        t = x[:, d][:, None]
        per_dim.append(bt[m, ks] * t**ks * (1 - t) ** (m - ks))
    cols = []
    for idx in itertools.product(range(m + 1), repeat=arity):
        col = np.ones(x.shape[0])
        for d, k in enumerate(idx):
            col = col * per_dim[d][:, k]
        cols.append(col)
    return np.stack(cols, axis=1)

"""Expected one-step composition of a polynomial with stochastic dynamics.

For dynamics x' = f(x) + v with independent additive noise of known moments,
the coefficients of E[B(f(x) + v)] are a fixed linear image of B's
coefficients: a dynamics matrix whose columns hold products of powers of the
components of f, times a lower-triangular moment matrix built from binomial
weights and the per-dimension noise moments.  Building both once per problem
turns the martingale constraint of the synthesis LP into plain rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polyalg import (MultiPoly, binomial_table, embed, embedding_matrix,
                      kron_all, mul)


@dataclass(frozen=True)
class NoiseMoments:
    """Per-dimension raw moment tables: tables[j][k] = E[v_j^k].

    Dimensions are independent, so mixed moments factor into these tables.
    """

    tables: tuple

    def __post_init__(self):
        tabs = tuple(np.asarray(t, dtype=float) for t in self.tables)
        for t in tabs:
            if t.ndim != 1 or t.size < 1:
                raise ValueError("each moment table must be a nonempty vector")
            if abs(t[0] - 1.0) > 1e-12:
                raise ValueError("zeroth moment must be 1")
            if np.any(t[2::2] < 0):
                raise ValueError("even-order moments must be nonnegative")
            t.flags.writeable = False
        object.__setattr__(self, "tables", tabs)

    @property
    def dim(self) -> int:
        return len(self.tables)

    @property
    def max_order(self) -> int:
        return min(t.size for t in self.tables) - 1

    def moment(self, j: int, k: int) -> float:
        t = self.tables[j]
        if k >= t.size:
            raise ValueError(f"moment of order {k} not available in dim {j}")
        return float(t[k])

    def to_dict(self) -> dict:
        return {"type": "moments", "tables": [t.tolist() for t in self.tables]}


def gaussian_moments(sigma, kmax: int) -> NoiseMoments:
    """Raw moments of independent centered Gaussians: sigma^k (k-1)!! for even k."""
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sig < 0):
        raise ValueError("sigma must be nonnegative")
    tables = []
    for s in sig:
        t = np.zeros(kmax + 1)
        t[0] = 1.0
        for k in range(2, kmax + 1, 2):
            t[k] = t[k - 2] * (k - 1) * s * s
        tables.append(t)
    return NoiseMoments(tuple(tables))


@dataclass(frozen=True)
class DynamicsSpec:
    """Polynomial vector field: one component polynomial per state dimension."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("dynamics need at least one component")
        d = len(comps)
        for f in comps:
            if not isinstance(f, MultiPoly) or f.arity != d:
                raise ValueError("each component must be a MultiPoly of arity D")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def component_degrees(self) -> tuple[int, ...]:
        return tuple(f.max_degree for f in self.components)

    def composed_degree(self, m: int) -> int:
        """Degree bound for a degree-m polynomial composed with f."""
        return m * sum(self.component_degrees)

    def step(self, x: np.ndarray) -> np.ndarray:
        """Deterministic part of one step, batched: f(x) for x of shape (n, D)."""
        x = np.atleast_2d(x)
        return np.stack([f(x) for f in self.components], axis=1)

    def to_dict(self) -> dict:
        return {"components": [f.to_dict() for f in self.components]}

    @staticmethod
    def from_dict(d: dict) -> "DynamicsSpec":
        return DynamicsSpec(tuple(MultiPoly.from_dict(c)
                                  for c in d["components"]))


def gamma_expect(moments: NoiseMoments, m: int, arity: int) -> np.ndarray:
    """Expected noise matrix of shape (m+1)^D x (m+1)^D, canonical order.

    Entry at (row l, col i) is prod_j C(l_j, i_j) E[v_j^(l_j - i_j)] for
    i <= l elementwise and zero otherwise; it factors as a Kronecker product
    of per-dimension lower-triangular maps, each with unit diagonal.
    """
    if moments.dim != arity:
        raise ValueError(f"noise dimension {moments.dim} != arity {arity}")
    if moments.max_order < m:
        raise ValueError(
            f"moment tables cover order {moments.max_order}, need {m}")
    bt = binomial_table(m)
    factors = []
    for j in range(arity):
        g = np.zeros((m + 1, m + 1))
        for l in range(m + 1):
            for i in range(l + 1):
                g[l, i] = bt[l, i] * moments.moment(j, l - i)
        factors.append(g)
    return kron_all(factors)


def dynamics_matrix(dyn: DynamicsSpec, m: int) -> np.ndarray:
    """Map of shape (p+1)^D x (m+1)^D whose columns are coefficient vectors
    of products of powers of the dynamics components.

    The column at multi-index (i_1, ..., i_D) holds the degree-p embedded
    coefficients of f_1^{i_1} * ... * f_D^{i_D}; the zero column is the
    constant 1.  Applying it to moment-weighted coefficients yields the
    coefficients of the expected composed polynomial.
    """
    d = dyn.dim
    p = dyn.composed_degree(m)
    powers = []
    for f in dyn.components:
        row = [MultiPoly.constant(1.0, d)]
        for _ in range(m):
            row.append(mul(row[-1], f))
        powers.append(row)
    cols = []
    for idx in np.ndindex(*(m + 1,) * d):
        prod = powers[0][idx[0]]
        for j in range(1, d):
            prod = mul(prod, powers[j][idx[j]])
        cols.append(embed(prod, p).flat)
    return np.stack(cols, axis=1)


def expected_composition(F: np.ndarray, e_gamma: np.ndarray,
                         b: np.ndarray) -> np.ndarray:
    """Coefficients of E[B(f(x) + v)] at the composed degree.

    Expanding B(f(x)+v) binomially, the weight of the dynamics-power column
    at multi-index i is sum_{l >= i} prod_j C(l_j, i_j) E[v_j^(l_j-i_j)] b_l,
    i.e. b contracted against the *rows* of the moment matrix, so with the
    row-indexed-by-l storage used here the product is F @ E[Gamma]^T @ b.
    """
    b = np.asarray(b, dtype=float).ravel()
    if e_gamma.shape[0] != b.size or F.shape[1] != e_gamma.shape[1]:
        raise ValueError("shape mismatch between F, E[Gamma] and b")
    return F @ (e_gamma.T @ b)


def martingale_gap_coeffs(F: np.ndarray, e_gamma: np.ndarray, b: np.ndarray,
                          m: int, p: int) -> np.ndarray:
    """Coefficients of E[B(f(x)+v)] - B(x) at degree p: (F E[Gamma] - Delta) b."""
    b = np.asarray(b, dtype=float).ravel()
    arity = _infer_arity(b.size, m)
    out = expected_composition(F, e_gamma, b)
    delta = embedding_matrix(m, p, arity)
    return out - delta @ b


def gap_matrix(F: np.ndarray, e_gamma: np.ndarray, m: int, p: int,
               arity: int) -> np.ndarray:
    """The one-step expected-increase map, built once per problem.

    Maps barrier coefficients b to the degree-p coefficients of
    E[B(f(x)+v)] - B(x); see :func:`expected_composition` for the transpose.
    """
    return F @ e_gamma.T - embedding_matrix(m, p, arity)


def _infer_arity(n_coeffs: int, m: int) -> int:
    arity = 1
    while (m + 1) ** arity < n_coeffs:
        arity += 1
    if (m + 1) ** arity != n_coeffs:
        raise ValueError(f"{n_coeffs} coefficients do not match degree {m}")
    return arity

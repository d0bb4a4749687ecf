"""Dense multivariate polynomial arithmetic over the power (monomial) basis.

A polynomial in D variables with per-dimension degree at most m is stored as
a dense coefficient tensor of shape (m+1,)*D, where entry ``coeffs[l1, ..., lD]``
is the coefficient of ``x1^l1 * ... * xD^lD``.

Canonical flat ordering
-----------------------
Every matrix and vector in this package indexes coefficient tensors in one
fixed order: lexicographic over the exponent tuple (l1, ..., lD) with the
*last* exponent varying fastest.  This is exactly numpy's C-order `ravel`,
so ``coeffs.ravel()`` produces the canonical vector and
``vec.reshape((m+1,)*D)`` inverts it.  Constructors of linear maps between
coefficient spaces (basis conversion, affine reparametrization, dynamics
composition, degree embedding) all rely on this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Binomial coefficients beyond this degree lose integer exactness in float64
# and signal a configuration mistake for this problem scale.
MAX_DEGREE = 64

_pascal_cache: dict[int, np.ndarray] = {}


def binomial_table(n_max: int) -> np.ndarray:
    """Pascal-triangle table ``T[n, k] = C(n, k)`` in float64, (n_max+1)^2."""
    if n_max > MAX_DEGREE:
        raise ValueError(f"degree {n_max} exceeds supported cap {MAX_DEGREE}")
    if n_max not in _pascal_cache:
        t = np.zeros((n_max + 1, n_max + 1))
        t[:, 0] = 1.0
        for n in range(1, n_max + 1):
            t[n, 1 : n + 1] = t[n - 1, 1 : n + 1] + t[n - 1, 0:n]
        _pascal_cache[n_max] = t
    return _pascal_cache[n_max]


def binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return binomial_table(n)[n, k]


def apply_separable(mats: list[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    """Apply matrix ``mats[d]`` along axis ``d`` of ``tensor`` for every d.

    The workhorse for all Kronecker-structured coefficient maps: applying
    per-dimension factors to the tensor is equivalent to multiplying the
    canonical flat vector by ``kron(mats[0], ..., mats[D-1])`` but never
    forms the large matrix.
    """
    out = tensor
    for d, m in enumerate(mats):
        out = np.moveaxis(np.tensordot(m, out, axes=(1, d)), 0, d)
    return out


def kron_all(mats: list[np.ndarray]) -> np.ndarray:
    """Kronecker product of the per-dimension factors, canonical order."""
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@dataclass(frozen=True)
class MultiPoly:
    """Multivariate polynomial as a dense coefficient tensor.

    ``coeffs`` has shape (m+1,)*D for arity D and uniform per-dimension
    degree m.  Instances are immutable; the underlying array is marked
    read-only so values can be shared freely across threads.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        sizes = set(arr.shape)
        if len(sizes) > 1:
            # pad to a uniform per-dimension degree
            m = max(arr.shape) - 1
            padded = np.zeros((m + 1,) * arr.ndim)
            padded[tuple(slice(0, s) for s in arr.shape)] = arr
            arr = padded
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def arity(self) -> int:
        return self.coeffs.ndim

    @property
    def max_degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def flat(self) -> np.ndarray:
        """Canonical coefficient vector (C-order ravel)."""
        return self.coeffs.ravel()

    @staticmethod
    def from_flat(vec, arity: int, max_degree: int) -> "MultiPoly":
        vec = np.asarray(vec, dtype=float)
        n = (max_degree + 1) ** arity
        if vec.size != n:
            raise ValueError(f"expected {n} coefficients, got {vec.size}")
        return MultiPoly(vec.reshape((max_degree + 1,) * arity))

    @staticmethod
    def constant(value: float, arity: int) -> "MultiPoly":
        c = np.zeros((1,) * arity)
        c[(0,) * arity] = value
        return MultiPoly(c)

    @staticmethod
    def variable(dim: int, arity: int) -> "MultiPoly":
        """The polynomial x_{dim} (0-based dimension index)."""
        if not 0 <= dim < arity:
            raise ValueError(f"dimension {dim} out of range for arity {arity}")
        c = np.zeros((2,) * arity)
        idx = [0] * arity
        idx[dim] = 1
        c[tuple(idx)] = 1.0
        return MultiPoly(c)

    def __call__(self, x) -> np.ndarray | float:
        return evaluate(self, x)

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "max_degree": self.max_degree,
            "coeffs": self.flat.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "MultiPoly":
        return MultiPoly.from_flat(d["coeffs"], d["arity"], d["max_degree"])


def evaluate(p: MultiPoly, x) -> np.ndarray | float:
    """Evaluate p at one point (shape (D,)) or a batch (shape (n, D))."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != p.arity:
        raise ValueError(f"point arity {x.shape[1]} != polynomial arity {p.arity}")
    # contract the coefficient tensor with per-dimension power vectors
    m = p.max_degree
    powers = x[:, :, None] ** np.arange(m + 1)[None, None, :]  # (n, D, m+1)
    out = np.broadcast_to(p.coeffs, (x.shape[0],) + p.coeffs.shape).copy()
    for d in range(p.arity):
        out = np.einsum("nk...,nk->n...", out, powers[:, d, :])
    return float(out[0]) if single else out


def mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Polynomial product; result degree is the sum of the input degrees."""
    if p.arity != q.arity:
        raise ValueError(f"arity mismatch: {p.arity} vs {q.arity}")
    out = _conv_nd(p.coeffs, q.coeffs)
    return MultiPoly(out)


def _conv_nd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact dense N-D convolution (coefficient product)."""
    out_shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    out = np.zeros(out_shape)
    for idx in np.ndindex(*b.shape):
        sl = tuple(slice(i, i + sa) for i, sa in zip(idx, a.shape))
        out[sl] += b[idx] * a
    return out


def poly_pow(p: MultiPoly, k: int) -> MultiPoly:
    """k-th power by repeated multiplication; k = 0 gives the constant 1."""
    if k < 0:
        raise ValueError("negative exponent")
    out = MultiPoly.constant(1.0, p.arity)
    for _ in range(k):
        out = mul(out, p)
    return out


def embed(p: MultiPoly, degree: int) -> MultiPoly:
    """Re-express p at a higher uniform degree (zero-padded coefficients)."""
    if degree < p.max_degree:
        raise ValueError(f"target degree {degree} < current degree {p.max_degree}")
    out = np.zeros((degree + 1,) * p.arity)
    out[tuple(slice(0, s) for s in p.coeffs.shape)] = p.coeffs
    return MultiPoly(out)


def embed_coeffs(vec, arity: int, degree: int, target: int) -> np.ndarray:
    """Vector form of :func:`embed` on canonical coefficient vectors."""
    p = MultiPoly.from_flat(vec, arity, degree)
    return embed(p, target).flat


def embedding_matrix(m: int, p: int, arity: int) -> np.ndarray:
    """Rectangular map of shape (p+1)^D x (m+1)^D realizing degree embedding.

    Columns are canonical degree-m unit coefficient vectors re-indexed at
    degree p; rows at multi-indices with any exponent above m are zero.
    """
    if p < m:
        raise ValueError(f"target degree {p} < source degree {m}")
    one_dim = np.zeros((p + 1, m + 1))
    one_dim[: m + 1, : m + 1] = np.eye(m + 1)
    return kron_all([one_dim] * arity)


@dataclass(frozen=True)
class DegreeMask:
    """Multi-index subset |l| <= m of the full maximal-degree index set."""

    arity: int
    degree: int
    kept_indices: frozenset = field(repr=False)

    def flat_mask(self) -> np.ndarray:
        """Boolean vector over the canonical order: True where |l| <= m."""
        shape = (self.degree + 1,) * self.arity
        mask = np.zeros(shape, dtype=bool)
        for idx in self.kept_indices:
            mask[idx] = True
        return mask.ravel()


def cumulative_mask(m: int, arity: int) -> DegreeMask:
    """All multi-indices with total degree |l| <= m, for cumulative templates."""
    if m < 0 or arity < 1:
        raise ValueError("need m >= 0 and arity >= 1")
    kept = frozenset(
        idx for idx in np.ndindex(*(m + 1,) * arity) if sum(idx) <= m
    )
    return DegreeMask(arity=arity, degree=m, kept_indices=kept)

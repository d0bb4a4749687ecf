"""Hyperrectangle geometry and affine coefficient reparametrization.

The synthesis pipeline bounds polynomials over axis-aligned boxes by pulling
every box back to the unit box: for a box Y with side lengths s and lower
corner t, the coefficients of ``a(s*x + t)`` are a linear image ``T^Y b`` of
the original coefficients, so range bounding on Y reduces to range bounding
on [0, 1]^D.  This module builds those maps and the rectangle families the
safety problem is decomposed into.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polyalg import apply_separable, binomial_table, kron_all

_affine_cache: dict[tuple, np.ndarray] = {}


@dataclass(frozen=True)
class HyperRect:
    """Axis-aligned box with nonempty interior."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float)).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError(f"degenerate rectangle: lo={lo}, hi={hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def key(self) -> tuple:
        return tuple(self.lo) + tuple(self.hi)

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Boolean membership for a point (D,) or batch (n, D), closed box."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.lo - tol) & (x <= self.hi + tol), axis=1)

    def corners(self) -> np.ndarray:
        """All 2^D corner points, shape (2^D, D)."""
        grids = np.meshgrid(*[(self.lo[d], self.hi[d]) for d in range(self.dim)],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def grid(self, points_per_dim: int) -> np.ndarray:
        """Uniform grid including the corners, shape (points_per_dim^D, D)."""
        axes = [np.linspace(self.lo[d], self.hi[d], points_per_dim)
                for d in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def split(self, dim: int) -> tuple["HyperRect", "HyperRect"]:
        """Halve along one dimension at the midpoint."""
        mid = 0.5 * (self.lo[dim] + self.hi[dim])
        lo2 = self.lo.copy()
        hi1 = self.hi.copy()
        hi1[dim] = mid
        lo2[dim] = mid
        return HyperRect(self.lo, hi1), HyperRect(lo2, self.hi)

    def subdivide(self, kappa: int) -> list["HyperRect"]:
        """Partition into kappa^D equal children (kappa >= 1)."""
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        if kappa == 1:
            return [self]
        edges = [np.linspace(self.lo[d], self.hi[d], kappa + 1)
                 for d in range(self.dim)]
        out = []
        for idx in np.ndindex(*(kappa,) * self.dim):
            lo = np.array([edges[d][i] for d, i in enumerate(idx)])
            hi = np.array([edges[d][i + 1] for d, i in enumerate(idx)])
            out.append(HyperRect(lo, hi))
        return out

    def pad(self, margin: float) -> "HyperRect":
        return HyperRect(self.lo - margin, self.hi + margin)

    def intersect(self, other: "HyperRect") -> "HyperRect | None":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.all(lo < hi):
            return HyperRect(lo, hi)
        return None

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "HyperRect":
        return HyperRect(np.asarray(d["lo"]), np.asarray(d["hi"]))


def affine_1d(lo: float, hi: float, m: int) -> np.ndarray:
    """One-dimensional coefficient map for the substitution x -> s*x + t.

    Row l, column i holds C(i, l) * s^l * t^(i-l) for i >= l, so that the
    coefficients of a(s*x + t) are A @ b.  s = hi - lo, t = lo.
    """
    s = hi - lo
    t = lo
    bt = binomial_table(m)
    a = np.zeros((m + 1, m + 1))
    for l in range(m + 1):
        for i in range(l, m + 1):
            a[l, i] = bt[i, l] * s**l * t ** (i - l)
    return a


def affine_factors(rect: HyperRect, m: int) -> list[np.ndarray]:
    """Per-dimension factors of the affine map T^Y at degree m."""
    return [affine_1d(rect.lo[d], rect.hi[d], m) for d in range(rect.dim)]


def affine_matrix(rect: HyperRect, m: int) -> np.ndarray:
    """Full coefficient map T^Y of shape (m+1)^D x (m+1)^D (cached).

    For every coefficient vector b, ``(T^Y b)^T z(x)`` on the unit box equals
    ``b^T z(.)`` on Y, so range bounding transfers between the two boxes.
    """
    key = (rect.key(), m)
    if key not in _affine_cache:
        _affine_cache[key] = kron_all(affine_factors(rect, m))
    return _affine_cache[key]


def transform_tensor(rect: HyperRect, coeffs: np.ndarray) -> np.ndarray:
    """Apply T^Y to a coefficient tensor without forming the full matrix."""
    m = coeffs.shape[0] - 1
    return apply_separable(affine_factors(rect, m), coeffs)


def _subtract_one(piece: HyperRect, hole: HyperRect) -> list[HyperRect]:
    """Axis-sweep slab decomposition of piece minus hole."""
    inter = piece.intersect(hole)
    if inter is None:
        return [piece]
    out = []
    lo = piece.lo.copy()
    hi = piece.hi.copy()
    for d in range(piece.dim):
        if lo[d] < inter.lo[d]:
            hi_slab = hi.copy()
            hi_slab[d] = inter.lo[d]
            out.append(HyperRect(lo.copy(), hi_slab))
            lo = lo.copy()
            lo[d] = inter.lo[d]
        if inter.hi[d] < hi[d]:
            lo_slab = lo.copy()
            lo_slab[d] = inter.hi[d]
            out.append(HyperRect(lo_slab, hi.copy()))
            hi = hi.copy()
            hi[d] = inter.hi[d]
    return out


def rect_cover_difference(outer: HyperRect,
                          holes: list[HyperRect]) -> list[HyperRect]:
    """Cover outer minus the union of holes by disjoint axis-aligned slabs.

    Sweeps dimensions in index order; output order is deterministic.  Holes
    may overlap each other or extend beyond outer.  Returns [] when the
    holes cover outer entirely.
    """
    pieces = [outer]
    for hole in holes:
        pieces = [p for piece in pieces for p in _subtract_one(piece, hole)]
    return pieces


def pad_frame(rect: HyperRect, margin: float) -> list[HyperRect]:
    """Boundary slabs of the margin-expanded box minus the original box.

    The slabs become unsafe regions so that leaving the original box counts
    as unsafe, and the expanded box becomes the synthesis domain.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    return rect_cover_difference(rect.pad(margin), [rect])


@dataclass(frozen=True)
class RegionPartition:
    """Rectangle families covering the domain, safe, unsafe and initial sets."""

    domain_rects: list[HyperRect]
    safe_rects: list[HyperRect]
    unsafe_rects: list[HyperRect] = field(default_factory=list)
    init_rects: list[HyperRect] = field(default_factory=list)

    def __post_init__(self):
        if not self.domain_rects or not self.safe_rects or not self.init_rects:
            raise ValueError("domain, safe and init families must be nonempty")
        dims = {r.dim for r in self.all_rects()}
        if len(dims) != 1:
            raise ValueError("all rectangles must share one dimension")

    @property
    def dim(self) -> int:
        return self.domain_rects[0].dim

    def all_rects(self) -> list[HyperRect]:
        return (list(self.domain_rects) + list(self.safe_rects)
                + list(self.unsafe_rects) + list(self.init_rects))

    def counts(self) -> tuple[int, int, int, int]:
        """(Q, Q_s, Q_u, Q_0) region counts."""
        return (len(self.domain_rects), len(self.safe_rects),
                len(self.unsafe_rects), len(self.init_rects))

    def validate(self, tol: float = 1e-9) -> None:
        """Geometric sanity of the four families; raises on violation.

        Checks that every rectangle lies within the domain's bounding box,
        that safe and unsafe interiors are disjoint, and that the initial
        rectangles are covered by the safe family (volume bookkeeping).
        """
        lo = np.min([r.lo for r in self.domain_rects], axis=0)
        hi = np.max([r.hi for r in self.domain_rects], axis=0)
        for r in self.all_rects():
            if np.any(r.lo < lo - tol) or np.any(r.hi > hi + tol):
                raise ValueError(f"rectangle {r.to_dict()} leaves the domain")
        for s in self.safe_rects:
            for u in self.unsafe_rects:
                inter = s.intersect(u)
                if inter is not None and inter.volume > tol:
                    raise ValueError("safe and unsafe interiors overlap")
        for r0 in self.init_rects:
            covered = sum(inter.volume for s in self.safe_rects
                          if (inter := r0.intersect(s)) is not None)
            if covered < r0.volume * (1 - 1e-9) - tol:
                raise ValueError("initial rectangle not inside the safe set")

    def to_dict(self) -> dict:
        return {
            "domain": [r.to_dict() for r in self.domain_rects],
            "safe": [r.to_dict() for r in self.safe_rects],
            "unsafe": [r.to_dict() for r in self.unsafe_rects],
            "init": [r.to_dict() for r in self.init_rects],
        }

    @staticmethod
    def from_dict(d: dict) -> "RegionPartition":
        return RegionPartition(
            domain_rects=[HyperRect.from_dict(r) for r in d["domain"]],
            safe_rects=[HyperRect.from_dict(r) for r in d["safe"]],
            unsafe_rects=[HyperRect.from_dict(r) for r in d["unsafe"]],
            init_rects=[HyperRect.from_dict(r) for r in d["init"]],
        )


def build_partition(state_box: HyperRect,
                    unsafe: list[HyperRect],
                    init: list[HyperRect],
                    frame_margin: float | None = None) -> RegionPartition:
    """Assemble the four rectangle families for a safety problem.

    The state box is expanded by ``frame_margin`` and the boundary slabs are
    added to the unsafe family (leaving the state box is unsafe); the padded
    box becomes the single domain rectangle.  The safe family covers the
    state box minus the declared unsafe rectangles.  ``frame_margin=None``
    defaults to 20% of the shortest side; 0 disables the frame.
    """
    if frame_margin is None:
        frame_margin = 0.2 * float(np.min(state_box.widths))
    if frame_margin > 0:
        frame = pad_frame(state_box, frame_margin)
        domain = [state_box.pad(frame_margin)]
    else:
        frame = []
        domain = [state_box]
    safe = rect_cover_difference(state_box, unsafe)
    if not safe:
        raise ValueError("unsafe set covers the whole state box")
    part = RegionPartition(
        domain_rects=domain,
        safe_rects=safe,
        unsafe_rects=frame + list(unsafe),
        init_rects=list(init),
    )
    part.validate()
    return part

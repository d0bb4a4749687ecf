"""Problem definitions: JSON schema, noise models and bundled fixtures.

A problem file declares the state box, unsafe and initial rectangles, the
polynomial dynamics, the noise law and the horizon.  Loading it produces the
rectangle families (with the boundary frame folded into the unsafe family),
the dynamics spec and the noise moments consumed by synthesis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .expectation import DynamicsSpec, NoiseMoments, gaussian_moments
from .polyalg import MultiPoly
from .regions import HyperRect, RegionPartition, build_partition

SCHEMA_VERSION = 1

FIXTURE_NAMES = ("trivial", "1d-toy", "2d-s", "2d-h", "2d-h-alt", "3d-s", "3d-h")


@dataclass(frozen=True)
class NoiseModel:
    """Noise law: Gaussian (sample-able) or raw per-dimension moment tables."""

    kind: str  # "gaussian" | "moments"
    sigma: np.ndarray | None = None
    tables: tuple | None = None

    def moments(self, kmax: int) -> NoiseMoments:
        if self.kind == "gaussian":
            return gaussian_moments(self.sigma, kmax)
        mom = NoiseMoments(self.tables)
        if mom.max_order < kmax:
            raise ValueError(
                f"moment tables cover order {mom.max_order}, need {kmax}")
        return mom

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind != "gaussian":
            raise ValueError(
                "only Gaussian noise can be sampled; moment-table noise "
                "supports synthesis and checking but not simulation")
        return rng.normal(0.0, self.sigma, size=(n, self.sigma.size))

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"type": "gaussian", "sigma": self.sigma.tolist()}
        return {"type": "moments", "tables": [list(t) for t in self.tables]}

    @staticmethod
    def from_dict(d: dict, dim: int) -> "NoiseModel":
        if d["type"] == "gaussian":
            sigma = np.atleast_1d(np.asarray(d["sigma"], dtype=float))
            if sigma.size == 1:
                sigma = np.full(dim, sigma[0])
            if sigma.size != dim:
                raise ValueError("sigma length must match the dimension")
            return NoiseModel(kind="gaussian", sigma=sigma)
        if d["type"] == "moments":
            tables = tuple(np.asarray(t, dtype=float) for t in d["tables"])
            if len(tables) != dim:
                raise ValueError("need one moment table per dimension")
            return NoiseModel(kind="moments", tables=tables)
        raise ValueError(f"unknown noise type {d['type']!r}")


@dataclass(frozen=True)
class Problem:
    """A safety verification instance ready for synthesis."""

    name: str
    state_box: HyperRect
    unsafe: tuple
    init: tuple
    dynamics: DynamicsSpec
    noise: NoiseModel
    horizon: int
    frame_margin: float | None
    partition: RegionPartition

    @property
    def dim(self) -> int:
        return self.state_box.dim

    def with_partition(self, partition: RegionPartition) -> "Problem":
        return replace(self, partition=partition)

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "dimension": self.dim,
            "dynamics": [f.to_dict() for f in self.dynamics.components],
            "noise": self.noise.to_dict(),
            "domain": self.state_box.to_dict(),
            "unsafe": [r.to_dict() for r in self.unsafe],
            "init": [r.to_dict() for r in self.init],
            "horizon": self.horizon,
        }
        if self.frame_margin is not None:
            d["frame_margin"] = self.frame_margin
        return d


def problem_from_dict(d: dict, name: str = "") -> Problem:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    dim = int(d["dimension"])
    comps = []
    for spec in d["dynamics"]:
        f = MultiPoly.from_dict({"arity": dim, **spec})
        comps.append(f)
    dynamics = DynamicsSpec(tuple(comps))
    noise = NoiseModel.from_dict(d["noise"], dim)
    state_box = HyperRect.from_dict(d["domain"])
    unsafe = tuple(HyperRect.from_dict(r) for r in d.get("unsafe", []))
    init = tuple(HyperRect.from_dict(r) for r in d["init"])
    margin = d.get("frame_margin")
    partition = build_partition(state_box, list(unsafe), list(init),
                                frame_margin=margin)
    return Problem(
        name=d.get("name", name),
        state_box=state_box,
        unsafe=unsafe,
        init=init,
        dynamics=dynamics,
        noise=noise,
        horizon=int(d.get("horizon", 10)),
        frame_margin=margin,
        partition=partition,
    )


def load_problem(path) -> Problem:
    """Load a problem from a JSON file path or a bundled fixture name."""
    p = Path(path)
    if not p.exists():
        candidate = fixture_path(str(path))
        if candidate is not None:
            p = candidate
        else:
            raise FileNotFoundError(f"problem file not found: {path}")
    with open(p) as fh:
        data = json.load(fh)
    return problem_from_dict(data, name=p.stem)


def fixture_path(name: str) -> Path | None:
    """Path of a bundled fixture ('2d-s', '2d-s.json', ...) or None."""
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in FIXTURE_NAMES:
        return None
    ref = resources.files("barrierlp").joinpath("fixtures").joinpath(f"{stem}.json")
    with resources.as_file(ref) as p:
        return Path(p)

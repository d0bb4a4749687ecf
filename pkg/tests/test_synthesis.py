import numpy as np
import pytest

from barrierlp.polyalg import MultiPoly
from barrierlp.problems import load_problem
from barrierlp.regions import HyperRect
from barrierlp.synthesis import (LinearProgram, SynthesisConfig, assemble,
                                 export_lp_text, lp_size, safety_level, solve,
                                 synthesize)

import scipy.sparse as sp


@pytest.fixture(scope="module")
def prob_2ds():
    return load_problem("2d-s")


@pytest.fixture(scope="module")
def prob_toy():
    return load_problem("1d-toy")


def test_variable_count_maximal(prob_2ds):
    cfg = SynthesisConfig(m=6, kappa=1)
    m, _ = lp_size(prob_2ds.partition, prob_2ds.dynamics, cfg)
    assert m == 49 + 2


def test_constraint_count_formula(prob_2ds):
    # (Q + Qu + Q0) (m+ + 1)^D + Qs (p+ + 1)^D after kappa multiplication
    cfg = SynthesisConfig(m=6, kappa=4)
    lp = assemble(prob_2ds, cfg)
    q, qs, qu, q0 = prob_2ds.partition.counts()
    mul = 4**2
    expected = (q + qu + q0) * mul * 7**2 + qs * mul * 13**2
    assert lp.n_constraints == expected == 7408
    assert lp.n_variables == 51


def test_degenerate_problem_is_free():
    prob = load_problem("trivial")
    cert = synthesize(prob, SynthesisConfig(m=2))
    assert cert.eta == pytest.approx(0.0, abs=1e-9)
    assert cert.gamma == pytest.approx(0.0, abs=1e-9)
    assert cert.delta_s == pytest.approx(1.0)


def test_solve_trivial_one_variable_lp():
    # min x subject to x >= 3
    lp = LinearProgram(G=sp.csr_matrix(np.array([[1.0]])),
                       rhs=np.array([3.0]),
                       c=np.array([1.0]),
                       bounds=[(None, None)])
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0)
    assert sol.w[0] == pytest.approx(3.0)


def test_safety_level_arithmetic():
    assert safety_level(0.1, 0.01, 10) == pytest.approx(0.8)
    assert safety_level(1.0, 0.5, 3) == 0.0
    assert safety_level(0.0, 0.0, 100) == 1.0


def test_2ds_benchmark_value(prob_2ds):
    # objective 1 - delta_s in the vicinity of the published 0.114 at the
    # documented default horizon
    cert = synthesize(prob_2ds, SynthesisConfig(m=6, kappa=4))
    assert cert.delta_s == pytest.approx(0.886, abs=0.02)
    assert cert.meta["objective"] == pytest.approx(1 - cert.delta_s, abs=1e-9)


def test_cumulative_reduces_variables_and_optimum(prob_2ds):
    cert_max = synthesize(prob_2ds, SynthesisConfig(m=4, kappa=2))
    cert_cum = synthesize(prob_2ds, SynthesisConfig(m=4, kappa=2,
                                                    degree_form="cumulative"))
    assert cert_cum.meta["variables"] == 15 + 2
    assert cert_max.meta["variables"] == 25 + 2
    # smaller template class can only do worse or equal
    assert cert_cum.delta_s <= cert_max.delta_s + 1e-9


def test_relaxation_monotonic_in_kappa(prob_toy):
    vals = [synthesize(prob_toy, SynthesisConfig(m=4, kappa=k)).delta_s
            for k in (1, 2, 4)]
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9


def test_relaxation_monotonic_in_m_plus(prob_toy):
    vals = [synthesize(prob_toy, SynthesisConfig(m=4, m_plus=mp)).delta_s
            for mp in (4, 8, 16)]
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9


def test_delta_s_nonincreasing_in_horizon(prob_toy):
    # for fixed (eta, gamma), longer horizons certify less
    cert = synthesize(prob_toy, SynthesisConfig(m=4, kappa=4))
    levels = [safety_level(cert.eta, cert.gamma, k) for k in (1, 5, 10, 50)]
    assert all(b <= a + 1e-12 for a, b in zip(levels, levels[1:]))


def test_lp_never_unbounded_on_random_problems():
    # eta, gamma are boxed and the objective uses only them
    rng = np.random.default_rng(0)
    from barrierlp.problems import NoiseModel, Problem
    from barrierlp.expectation import DynamicsSpec
    from barrierlp.regions import build_partition
    for _ in range(5):
        lo = rng.uniform(-1, 0, size=1)
        hi = rng.uniform(0.5, 1.5, size=1)
        box = HyperRect(lo, hi)
        width = float(hi[0] - lo[0])
        init_lo = lo + 0.1 * width
        init = [HyperRect(init_lo, init_lo + 0.2 * width)]
        part = build_partition(box, [], init, frame_margin=0.2)
        f = MultiPoly(np.array([0.0, float(rng.uniform(-0.8, 0.8))]))
        prob = Problem(name="rand", state_box=box, unsafe=(), init=tuple(init),
                       dynamics=DynamicsSpec((f,)),
                       noise=NoiseModel(kind="gaussian",
                                        sigma=np.array([0.05])),
                       horizon=5, frame_margin=0.2, partition=part)
        lp = assemble(prob, SynthesisConfig(m=int(rng.integers(2, 5))))
        sol = solve(lp)
        assert sol.status == "optimal"


def test_feasible_certificate_survives_tighter_recheck(prob_2ds):
    # re-derived bounds at (m_plus + 2, 2 kappa) keep every family margin
    # above -1e-6; the doubled subdivision nests inside the original one,
    # which is what makes the tightening monotone
    from barrierlp.synthesis import build_blocks
    cert = synthesize(prob_2ds, SynthesisConfig(m=4, kappa=2))
    cfg_tight = SynthesisConfig(m=4, m_plus=6, p_plus=10, kappa=4)
    moments = prob_2ds.noise.moments(4)
    blocks, _ = build_blocks(prob_2ds.partition, prob_2ds.dynamics, moments,
                             cfg_tight)
    for blk in blocks:
        slack = blk.slack(cert.b.flat, cert.eta, cert.gamma)
        assert float(np.min(slack)) >= -1e-6


def test_max_constraints_guard(prob_2ds):
    from barrierlp.synthesis import SynthesisError
    with pytest.raises(SynthesisError):
        assemble(prob_2ds, SynthesisConfig(m=6, kappa=4, max_constraints=100))


def test_degree_underflow_rejected(prob_2ds):
    with pytest.raises(ValueError):
        assemble(prob_2ds, SynthesisConfig(m=6, p_plus=6))
    with pytest.raises(ValueError):
        SynthesisConfig(m=6, m_plus=4)


def test_export_lp_format(prob_toy):
    lp = assemble(prob_toy, SynthesisConfig(m=2))
    text = export_lp_text(lp, name="toy")
    assert text.startswith("\\ Problem: toy\nMinimize")
    assert "Subject To" in text and "Bounds" in text and text.rstrip().endswith("End")
    assert " 0 <= eta <= 1" in text
    assert "b0 free" in text
    # one row per assembled constraint
    assert sum(1 for line in text.splitlines() if line.startswith(" r")) == lp.n_constraints


def test_certificate_json_round_trip(prob_toy, tmp_path):
    from barrierlp.synthesis import Certificate
    cert = synthesize(prob_toy, SynthesisConfig(m=4, kappa=2))
    path = tmp_path / "cert.json"
    cert.save(path)
    loaded = Certificate.load(path)
    assert np.allclose(loaded.b.coeffs, cert.b.coeffs)
    assert loaded.delta_s == pytest.approx(cert.delta_s)
    assert loaded.meta["kappa"] == 2

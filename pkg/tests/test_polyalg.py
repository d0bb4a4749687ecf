import numpy as np
import pytest

from barrierlp.polyalg import (MultiPoly, binom, cumulative_mask, embed,
                               embed_coeffs, embedding_matrix, kron_all, mul,
                               poly_pow)


def random_poly(rng, arity, degree):
    return MultiPoly(rng.uniform(-1, 1, size=(degree + 1,) * arity))


def test_eval_constant():
    p = MultiPoly.constant(1.0, 2)
    assert p(np.array([0.7, -0.3])) == 1.0


def test_eval_monomial():
    # p(x) = x^2
    p = MultiPoly(np.array([0.0, 0.0, 1.0]))
    assert p(np.array([0.5])) == pytest.approx(0.25)


def test_eval_root():
    # p(x, y) = (x - 0.5)^2, no y dependence
    c = np.zeros((3, 1))
    c[:, 0] = [0.25, -1.0, 1.0]
    p = MultiPoly(c)
    assert p(np.array([0.5, 123.0])) == pytest.approx(0.0, abs=1e-15)


def test_eval_arity_mismatch():
    p = MultiPoly.constant(1.0, 2)
    with pytest.raises(ValueError):
        p(np.array([1.0]))


def test_eval_batch():
    rng = np.random.default_rng(0)
    p = random_poly(rng, 2, 3)
    pts = rng.uniform(-1, 1, size=(5, 2))
    batched = p(pts)
    for i in range(5):
        assert batched[i] == pytest.approx(p(pts[i]), rel=1e-12)


def test_mul_x_times_x():
    x = MultiPoly(np.array([0.0, 1.0]))
    assert np.allclose(mul(x, x).flat, [0.0, 0.0, 1.0])


def test_mul_conjugates():
    p = MultiPoly(np.array([1.0, 1.0]))
    q = MultiPoly(np.array([1.0, -1.0]))
    assert np.allclose(mul(p, q).flat, [1.0, 0.0, -1.0])


def test_mul_half_x_squared():
    # (0.5x) * (0.5x) = 0.25 x^2, cross-checked by evaluation
    h = MultiPoly(np.array([0.0, 0.5]))
    prod = mul(h, h)
    assert np.allclose(prod.flat, [0.0, 0.0, 0.25])
    rng = np.random.default_rng(1)
    for x in rng.uniform(-2, 2, size=10):
        assert prod(np.array([x])) == pytest.approx(0.25 * x * x, rel=1e-12)


def test_mul_arity_mismatch():
    with pytest.raises(ValueError):
        mul(MultiPoly.constant(1.0, 1), MultiPoly.constant(1.0, 2))


def test_mul_eval_ring_law():
    # eval(p*q, x) == eval(p, x) * eval(q, x) for random inputs
    rng = np.random.default_rng(2)
    for _ in range(30):
        arity = rng.integers(1, 4)
        p = random_poly(rng, arity, int(rng.integers(0, 4)))
        q = random_poly(rng, arity, int(rng.integers(0, 4)))
        prod = mul(p, q)
        x = rng.uniform(-1, 1, size=arity)
        lhs = prod(x)
        rhs = p(x) * q(x)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_pow_identity_and_powers():
    x = MultiPoly(np.array([0.0, 1.0]))
    assert np.allclose(poly_pow(x, 0).flat, [1.0])
    assert np.allclose(poly_pow(MultiPoly(np.array([0.0, 0.5])), 2).flat,
                       [0.0, 0.0, 0.25])
    one_plus_x = MultiPoly(np.array([1.0, 1.0]))
    assert np.allclose(poly_pow(one_plus_x, 2).flat, [1.0, 2.0, 1.0])


def test_embed_vectors():
    assert np.allclose(embed_coeffs([2.0, 3.0], 1, 1, 2), [2.0, 3.0, 0.0])
    assert np.allclose(embed_coeffs([5.0], 1, 0, 3), [5.0, 0.0, 0.0, 0.0])


def test_embed_rejects_lower_degree():
    p = MultiPoly(np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        embed(p, 1)


def test_embed_preserves_evaluation():
    rng = np.random.default_rng(3)
    p = random_poly(rng, 2, 1)
    q = embed(p, 2)
    pts = rng.uniform(-1, 1, size=(20, 2))
    assert np.allclose(p(pts), q(pts))


def test_embedding_matrix_matches_embed():
    rng = np.random.default_rng(4)
    p = random_poly(rng, 2, 2)
    mat = embedding_matrix(2, 4, 2)
    assert np.allclose(mat @ p.flat, embed(p, 4).flat)


def test_cumulative_mask_small():
    mask = cumulative_mask(1, 2)
    assert mask.kept_indices == frozenset({(0, 0), (1, 0), (0, 1)})
    mask = cumulative_mask(2, 1)
    assert mask.kept_indices == frozenset({(0,), (1,), (2,)})


def test_cumulative_mask_count_matches_enumeration():
    # number of multi-indices with |l| <= m equals C(m + D, D)
    for m, d in [(2, 3), (3, 2), (4, 1)]:
        mask = cumulative_mask(m, d)
        brute = sum(1 for idx in np.ndindex(*(m + 1,) * d) if sum(idx) <= m)
        assert len(mask.kept_indices) == brute == int(binom(m + d, d))


def test_flat_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(10):
        arity = int(rng.integers(1, 4))
        deg = int(rng.integers(0, 4))
        p = random_poly(rng, arity, deg)
        q = MultiPoly.from_flat(p.flat, arity, deg)
        assert np.array_equal(p.coeffs, q.coeffs)


def test_canonical_order_last_index_fastest():
    # coeffs[l1, l2] with l2 varying fastest in the flat vector
    c = np.arange(9.0).reshape(3, 3)
    p = MultiPoly(c)
    assert list(p.flat[:3]) == [c[0, 0], c[0, 1], c[0, 2]]


def test_serialization_round_trip():
    rng = np.random.default_rng(6)
    p = random_poly(rng, 2, 3)
    q = MultiPoly.from_dict(p.to_dict())
    assert np.allclose(p.coeffs, q.coeffs)


def test_kron_all_pair():
    a = np.array([[1.0, 2.0]])
    b = np.eye(2)
    assert np.allclose(kron_all([a, b]), np.kron(a, b))

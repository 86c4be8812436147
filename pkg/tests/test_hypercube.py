import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import hadamard as dense_hadamard

from lambdalab.errors import CapacityError, DomainError
from lambdalab.hypercube import (HypercubeFunction, WalshSpectrum, character, character_matrix,
                                 conditional_expectation, fwht, inner, lp_norm, synthesize)


def _direct_character(n, mask):
    # product of coordinates x_i = (-1)^{b_i} over i in mask
    out = []
    for b in range(1 << n):
        v = 1
        for i in range(n):
            if (mask >> i) & 1:
                v *= -1 if (b >> i) & 1 else 1
        out.append(v)
    return np.array(out, dtype=float)


def test_character_examples():
    assert character(1, 0).values.tolist() == [1, 1]
    assert character(1, 1).values.tolist() == [1, -1]
    assert character(2, 3).values.tolist() == [1, -1, -1, 1]


@pytest.mark.parametrize("n", [1, 3, 5])
def test_character_matches_coordinate_product(n):
    for mask in range(1 << n):
        np.testing.assert_array_equal(character(n, mask).values, _direct_character(n, mask))


def test_mask_out_of_range():
    with pytest.raises(DomainError):
        character(2, 4)


def test_bits_cap():
    with pytest.raises(CapacityError):
        HypercubeFunction.zeros(25)


def test_invalid_values():
    with pytest.raises(DomainError):
        HypercubeFunction(1, [1.0, np.nan])
    with pytest.raises(DomainError):
        HypercubeFunction(2, [1.0, 2.0])


def test_fwht_examples():
    spec = fwht(HypercubeFunction.constant(3))
    assert spec.coeffs.tolist() == [1.0] + [0.0] * 7
    spec = fwht(character(3, 5))
    assert spec.coeffs.tolist() == [1.0 if a == 5 else 0.0 for a in range(8)]
    spec = fwht(HypercubeFunction(1, [2.0, 0.0]))
    assert spec.coeffs.tolist() == [1.0, 1.0]


@pytest.mark.parametrize("n", [0, 1, 4, 7])
def test_fwht_matches_dense_hadamard(n):
    # Sylvester ordering of the dense matrix coincides with the little-endian point code
    rng = np.random.default_rng(n)
    f = rng.normal(size=1 << n)
    H = dense_hadamard(1 << n)
    np.testing.assert_allclose(fwht(HypercubeFunction(n, f)).coeffs, H @ f / (1 << n), atol=1e-12)


def test_round_trip_large():
    rng = np.random.default_rng(0)
    f = HypercubeFunction(20, rng.normal(size=1 << 20))
    back = fwht(fwht(f), "inverse")
    np.testing.assert_allclose(back.values, f.values, atol=1e-12 * np.abs(f.values).max() * 10)


def test_fwht_type_errors():
    with pytest.raises(DomainError):
        fwht(WalshSpectrum(1, [1, 0]))
    with pytest.raises(DomainError):
        fwht(HypercubeFunction(1, [1, 0]), "inverse")
    with pytest.raises(DomainError):
        fwht(HypercubeFunction(1, [1, 0]), "sideways")


def test_lp_norm_examples():
    f = HypercubeFunction(1, [2.0, 0.0])
    assert lp_norm(f, 1) == 1.0
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(2), abs=1e-15)
    assert lp_norm(f, np.inf) == 2.0
    for p in (1, 1.5, 4, np.inf):
        assert lp_norm(character(4, 9), p) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        lp_norm(f, 0.5)


def test_orthonormality():
    n = 10
    W = character_matrix(n, range(1 << n))
    G = W.T @ W / (1 << n)
    assert np.abs(G - np.eye(1 << n)).max() <= 1e-12


def test_inner_products():
    assert inner(character(3, 1), character(3, 1)) == 1.0
    assert inner(character(3, 1), character(3, 2)) == 0.0
    with pytest.raises(DomainError):
        inner(character(3, 1), character(2, 1))


def test_conditional_expectation_examples():
    f = HypercubeFunction(1, [2.0, 0.0])
    assert conditional_expectation(f, 0).values.tolist() == [1.0, 1.0]
    g = HypercubeFunction(3, np.arange(8.0))
    np.testing.assert_array_equal(conditional_expectation(g, 7).values, g.values)
    np.testing.assert_array_equal(conditional_expectation(character(4, 0b0101), 0b0111).values,
                                  character(4, 0b0101).values)
    np.testing.assert_array_equal(conditional_expectation(character(4, 0b1001), 0b0111).values,
                                  np.zeros(16))


def test_serialisation_round_trip():
    f = HypercubeFunction(2, [0.1, -2.0, 3.5, 1e-300])
    g = HypercubeFunction.from_dict(f.to_dict())
    np.testing.assert_array_equal(f.values, g.values)


def test_arithmetic():
    f, g = character(2, 1), character(2, 2)
    np.testing.assert_array_equal((f + g).values, f.values + g.values)
    np.testing.assert_array_equal((f - g).values, f.values - g.values)
    np.testing.assert_array_equal((2 * f).values, 2 * f.values)
    with pytest.raises(DomainError):
        f + character(3, 1)


functions = st.integers(0, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2 ** 32 - 1)))


@given(functions, st.integers(0, 1023))
def test_conditional_expectation_spectrum(nf, raw_mask):
    n, seed = nf
    mask = raw_mask & ((1 << n) - 1)
    f = HypercubeFunction(n, np.random.default_rng(seed).normal(size=1 << n))
    P = conditional_expectation(f, mask)
    kept = np.array([(a & ~mask) == 0 for a in range(1 << n)])
    expected = np.where(kept, fwht(f).coeffs, 0.0)
    np.testing.assert_allclose(fwht(P).coeffs, expected, atol=1e-12)
    np.testing.assert_allclose(conditional_expectation(P, mask).values, P.values, atol=1e-12)
    for p in (1, 2, np.inf):
        assert lp_norm(P, p) <= lp_norm(f, p) + 1e-12


@given(functions)
def test_parseval_and_round_trip(nf):
    n, seed = nf
    f = HypercubeFunction(n, np.random.default_rng(seed).normal(size=1 << n))
    spec = fwht(f)
    assert np.sum(spec.coeffs ** 2) == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-10)
    np.testing.assert_allclose(fwht(spec, "inverse").values, f.values, atol=1e-12)


@given(functions, st.floats(1, 8), st.floats(1, 8))
def test_norm_monotone(nf, p, q):
    n, seed = nf
    p, q = min(p, q), max(p, q)
    f = HypercubeFunction(n, np.random.default_rng(seed).normal(size=1 << n))
    assert lp_norm(f, p) <= lp_norm(f, q) * (1 + 1e-12)
    assert lp_norm(f, q) <= lp_norm(f, np.inf) * (1 + 1e-12)


@given(st.integers(1, 8), st.data())
def test_synthesize_matches_sum(n, data):
    masks = data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=1, max_size=6, unique=True))
    coeffs = data.draw(st.lists(st.floats(-5, 5), min_size=len(masks), max_size=len(masks)))
    f = synthesize(n, masks, coeffs)
    direct = sum(c * _direct_character(n, m) for c, m in zip(coeffs, masks))
    np.testing.assert_allclose(f.values, direct, atol=1e-12)

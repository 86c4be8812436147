import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from lambdalab.errors import DomainError
from lambdalab.estimators import ConditionalExpectation, SymmetricHullDistance, WalshTransformer
from lambdalab.hypercube import character, conditional_expectation, fwht, HypercubeFunction


def test_walsh_transformer_round_trip():
    X = np.random.default_rng(0).normal(size=(5, 16))
    wt = WalshTransformer().fit(X)
    coeffs = wt.transform(X)
    for row, c in zip(X, coeffs):
        assert np.allclose(c, fwht(HypercubeFunction(4, row)).coeffs)
    assert np.allclose(wt.inverse_transform(coeffs), X)
    with pytest.raises(DomainError):
        WalshTransformer().fit(np.zeros((2, 6)))
    with pytest.raises(NotFittedError):
        WalshTransformer().transform(X)


def test_conditional_expectation_transformer():
    X = np.random.default_rng(1).normal(size=(4, 8))
    out = ConditionalExpectation(block=0b101).fit_transform(X)
    for row, o in zip(X, out):
        assert np.allclose(o, conditional_expectation(HypercubeFunction(3, row), 0b101).values)
    est = clone(ConditionalExpectation(block=3))
    assert est.get_params() == {"block": 3}
    with pytest.raises(DomainError):
        ConditionalExpectation(block=8).fit(X)


def test_hull_distance_transformer():
    hull = np.stack([character(3, 1).values, character(3, 2).values])
    X = np.stack([character(3, 1).values, character(3, 4).values, np.zeros(8)])
    d = SymmetricHullDistance(method="simplex").fit(hull).transform(X)
    assert d.shape == (3, 1)
    assert np.allclose(d[:, 0], [0.0, 1.0, 0.0], atol=1e-9)


def test_pipeline():
    X = np.random.default_rng(2).normal(size=(3, 8))
    pipe = make_pipeline(ConditionalExpectation(block=0b011), WalshTransformer())
    out = pipe.fit_transform(X)
    # coordinates outside the block carry no spectrum
    assert np.allclose(out[:, 4:], 0.0)

"""scikit-learn style wrappers for batch use.

Each sample is one function on the cube: a row of ``2**n`` values in
canonical point order.
"""
from __future__ import annotations

from math import log2

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DomainError
from .hypercube import block_average, hadamard
from .separation_lab import hull_distance_array


def _cube_bits(X: np.ndarray) -> int:
    width = X.shape[1]
    if width & (width - 1):
        raise DomainError("rows must have 2**n entries")
    return int(log2(width))


class WalshTransformer(TransformerMixin, BaseEstimator):
    """Rows of function values to probability-normalised Walsh coefficients."""

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_bits_ = _cube_bits(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_bits_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DomainError("width differs from the fitted cube")
        return hadamard(X) / X.shape[1]

    def inverse_transform(self, X):
        check_is_fitted(self, "n_bits_")
        return hadamard(check_array(X))


class ConditionalExpectation(TransformerMixin, BaseEstimator):
    """Average out the coordinates outside ``block``."""

    def __init__(self, block: int = 0):
        self.block = block

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_bits_ = _cube_bits(X)
        self.n_features_in_ = X.shape[1]
        if not 0 <= int(self.block) < X.shape[1]:
            raise DomainError("block is not a subset of the cube coordinates")
        return self

    def transform(self, X):
        check_is_fitted(self, "n_bits_")
        X = check_array(X)
        return block_average(X, self.n_bits_, int(self.block), axis=1)


class SymmetricHullDistance(TransformerMixin, BaseEstimator):
    """``fit`` stores hull vertices (one per row); ``transform`` gives L_1 distances.

    The output has one column: the distance of each row to the symmetric
    convex hull of the fitted vertices.
    """

    def __init__(self, method: str = "auto", tol: float = 1e-7):
        self.method = method
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X)
        _cube_bits(X)
        self.columns_ = X.T.copy()
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "columns_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DomainError("width differs from the fitted cube")
        out = [hull_distance_array(row, self.columns_, None, self.method, self.tol).distance
               for row in X]
        return np.asarray(out)[:, None]

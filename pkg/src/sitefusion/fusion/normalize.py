"""Threshold-centred linear scaling of fusion inputs into [-1, 1]."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..dta import fit_threshold
from ..exceptions import InvalidInputError


def fit_column_thresholds(X, y, integer=None, min_threshold=None) -> np.ndarray:
    """Per-column F1-optimal thresholds, optionally floored at ``min_threshold``."""
    X = np.asarray(X, dtype=float)
    t = np.array([fit_threshold(X[:, j], y, integer).threshold for j in range(X.shape[1])])
    if min_threshold is not None:
        t = np.maximum(t, min_threshold)
    return t


def normalize_inputs(X, thresholds) -> np.ndarray:
    """``clip((v - t) / t, -1, 1)`` columnwise.

    >>> normalize_inputs([[0.0, 4.0, 20.0]], [4.0, 4.0, 4.0])
    array([[-1.,  0.,  1.]])
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(thresholds, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != t.size:
        raise InvalidInputError(f"expected {t.size} features, got {X.shape[1]}")
    if np.any(t == 0) or not np.all(np.isfinite(t)):
        raise InvalidInputError("normalization thresholds must be finite and nonzero")
    return np.clip((X - t) / t, -1.0, 1.0)


class ThresholdScaler(TransformerMixin, BaseEstimator):
    """Scale each feature relative to its decision threshold and clamp.

    Parameters
    ----------
    thresholds : array-like or None
        Per-feature thresholds; fitted by F1 optimization when ``None``
        (requires ``y``).
    integer : bool or None
        Passed to the threshold sweep.
    min_threshold : float or None
        Floor for fitted thresholds so the scaling stays defined.
    """

    def __init__(self, thresholds=None, integer=None, min_threshold=None):
        self.thresholds = thresholds
        self.integer = integer
        self.min_threshold = min_threshold

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if self.thresholds is None:
            if y is None:
                raise InvalidInputError("labels are required to fit thresholds")
            t = fit_column_thresholds(X, y, self.integer, self.min_threshold)
        else:
            t = np.asarray(self.thresholds, dtype=float).reshape(-1)
        if t.size != X.shape[1]:
            raise InvalidInputError("thresholds do not match the number of features")
        if np.any(t == 0):
            raise InvalidInputError("normalization thresholds must be nonzero")
        self.thresholds_ = t
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "thresholds_")
        return normalize_inputs(check_array(X, dtype=float), self.thresholds_)

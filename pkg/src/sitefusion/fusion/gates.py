"""OR-gate fusion of per-component threshold decisions."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import InvalidInputError
from .normalize import fit_column_thresholds


def or_gate(decisions) -> bool:
    decisions = list(decisions)
    if not decisions:
        raise InvalidInputError("or_gate needs at least one input")
    return any(bool(d) for d in decisions)


class OrGateClassifier(ClassifierMixin, BaseEstimator):
    """Positive when any component meets its F1-optimal threshold.

    With ``thresholds`` given, ``fit`` only validates shapes and ``y`` may
    be omitted.
    """

    def __init__(self, thresholds=None, integer=None):
        self.thresholds = thresholds
        self.integer = integer

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if self.thresholds is None:
            if y is None:
                raise InvalidInputError("labels are required to fit thresholds")
            t = fit_column_thresholds(X, y, self.integer)
        else:
            t = np.asarray(self.thresholds, dtype=float).reshape(-1)
        if t.size != X.shape[1]:
            raise InvalidInputError("thresholds do not match the number of features")
        self.thresholds_ = t
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def component_decisions(self, X) -> np.ndarray:
        check_is_fitted(self, "thresholds_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X >= self.thresholds_

    def decision_function(self, X):
        """Number of components voting positive."""
        return self.component_decisions(X).sum(axis=1).astype(float)

    def predict(self, X):
        return self.component_decisions(X).any(axis=1).astype(int)

    def to_dict(self) -> dict:
        check_is_fitted(self, "thresholds_")
        return {"kind": "or", "thresholds": self.thresholds_.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "OrGateClassifier":
        t = np.asarray(d["thresholds"], dtype=float)
        return cls(thresholds=t).fit(np.zeros((1, t.size)))

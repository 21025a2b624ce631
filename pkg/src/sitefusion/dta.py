"""F1-optimal decision thresholds (decision-theoretic approach).

The decision rule is always ``value >= threshold -> positive``. Integer
features are swept over every integer between their observed extremes,
continuous ones over their distinct observed values; the F1 of a step
rule can only change at a data value, so either sweep contains the
optimum.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidInputError, UndefinedMetricError

_MAX_INTEGER_SWEEP = 1_000_000


class SweepRow(NamedTuple):
    threshold: float
    tpr: float
    ppv: float
    f1: float


@dataclass
class DtaThreshold:
    threshold: float
    f1: float
    tpr: float
    ppv: float
    cls: str | None = None
    feature_type: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("cls")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DtaThreshold":
        return cls(
            threshold=float(d["threshold"]),
            f1=float(d["f1"]),
            tpr=float(d["tpr"]),
            ppv=float(d["ppv"]),
            cls=d.get("class"),
            feature_type=d.get("feature_type"),
        )


def _prepare(values, labels):
    v = np.asarray(values, dtype=float).reshape(-1)
    y = np.asarray(labels).reshape(-1).astype(bool)
    if v.size != y.size:
        raise InvalidInputError("values and labels differ in length")
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidInputError("values must be a nonempty finite sequence")
    if not y.any():
        raise UndefinedMetricError("F1 is undefined without positive labels")
    return v, y


def is_integer_valued(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(v == np.round(v)))


def _thresholds(v: np.ndarray, integer) -> np.ndarray:
    if integer is None:
        integer = is_integer_valued(v)
    lo, hi = v.min(), v.max()
    if integer and hi - lo <= _MAX_INTEGER_SWEEP:
        return np.arange(np.ceil(lo), np.floor(hi) + 1.0)
    return np.unique(v)


def _counts(v, y, t):
    """TP, FP, FN of the rule ``v >= t`` for each threshold in ``t``."""
    vs = np.sort(v)
    ps = np.sort(v[y])
    predicted = v.size - np.searchsorted(vs, t, side="left")
    tp = ps.size - np.searchsorted(ps, t, side="left")
    return tp, predicted - tp, ps.size - tp


def sweep_curve(values, labels, integer: bool | None = None) -> list[SweepRow]:
    """TPR, PPV and F1 for every candidate threshold, ascending.

    PPV is reported as 0 where no value reaches the threshold.
    """
    v, y = _prepare(values, labels)
    t = _thresholds(v, integer)
    tp, fp, fn = _counts(v, y, t)
    rows = []
    for ti, a, b, c in zip(t.tolist(), tp.tolist(), fp.tolist(), fn.tolist()):
        tpr = a / (a + c)
        ppv = a / (a + b) if a + b else 0.0
        f1 = 2 * a / (2 * a + b + c)
        rows.append(SweepRow(ti, tpr, ppv, f1))
    return rows


def fit_threshold(values, labels, integer: bool | None = None, cls=None, feature_type=None) -> DtaThreshold:
    """Threshold maximizing training F1; ties go to the largest threshold."""
    rows = sweep_curve(values, labels, integer)
    best = max(rows, key=lambda r: (r.f1, r.threshold))
    return DtaThreshold(best.threshold, best.f1, best.tpr, best.ppv, cls, feature_type)


class F1ThresholdClassifier(ClassifierMixin, BaseEstimator):
    """Single-feature classifier whose threshold maximizes training F1.

    Parameters
    ----------
    integer : bool or None
        Force the integer sweep on/off; ``None`` detects integer data.
    """

    def __init__(self, integer=None):
        self.integer = integer

    def fit(self, X, y):
        v = np.asarray(X, dtype=float)
        if v.ndim == 2:
            if v.shape[1] != 1:
                raise InvalidInputError("F1ThresholdClassifier takes a single feature")
            v = v[:, 0]
        self.result_ = fit_threshold(v, y, self.integer)
        self.threshold_ = self.result_.threshold
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "threshold_")
        v = np.asarray(X, dtype=float)
        v = v[:, 0] if v.ndim == 2 else v
        return v - self.threshold_

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(int)

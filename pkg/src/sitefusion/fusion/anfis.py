"""First-order Takagi-Sugeno-Kang fuzzy inference with threshold-anchored rules.

Each input has one sigmoidal membership "exceeds its threshold",
``mu(v) = 1 / (1 + exp(-k (v - t)))`` with ``k = 4 / t`` by default, so
``v = 0`` fires at about 0.018 and ``v = 2t`` at about 0.982. A rule's
antecedent is a product of such terms (``'high'`` uses ``mu``, ``'low'``
uses ``1 - mu``, ``None`` ignores the input). Consequents are linear in
the inputs; only they are trained, by full-batch gradient descent on the
squared error.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..dta import fit_threshold
from ..exceptions import DegenerateDataError, InvalidInputError
from .normalize import fit_column_thresholds, normalize_inputs

HIGH = "high"
LOW = "low"


def default_rules(n_inputs: int) -> list[tuple]:
    """One "component i is high" rule per input; four-input sets add an all-low guard."""
    rules = [tuple(HIGH if j == i else None for j in range(n_inputs)) for i in range(n_inputs)]
    if n_inputs == 4:
        rules.append(tuple(LOW for _ in range(n_inputs)))
    return rules


@dataclass
class AnfisModel:
    centers: np.ndarray
    steepness: np.ndarray
    rules: list
    consequents: np.ndarray  # (n_rules, n_inputs + 1), bias last
    normalize: bool = True
    threshold: float = 0.5
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1)
        self.steepness = np.asarray(self.steepness, dtype=float).reshape(-1)
        self.consequents = np.asarray(self.consequents, dtype=float).reshape(len(self.rules), self.centers.size + 1)
        self.rules = [tuple(r) for r in self.rules]
        for r in self.rules:
            if len(r) != self.centers.size or any(t not in (HIGH, LOW, None) for t in r):
                raise InvalidInputError(f"malformed rule {r!r}")

    @property
    def n_inputs(self) -> int:
        return self.centers.size

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_inputs:
            raise InvalidInputError(f"expected {self.n_inputs} features, got {X.shape[1]}")
        return X

    def memberships(self, X) -> np.ndarray:
        X = self._check(X)
        return 0.5 * (1.0 + np.tanh(0.5 * self.steepness * (X - self.centers)))

    def firing(self, X) -> np.ndarray:
        """Rule firing strengths, shape (n_samples, n_rules)."""
        mu = self.memberships(X)
        w = np.ones((mu.shape[0], len(self.rules)))
        for r, rule in enumerate(self.rules):
            for i, term in enumerate(rule):
                if term == HIGH:
                    w[:, r] *= mu[:, i]
                elif term == LOW:
                    w[:, r] *= 1.0 - mu[:, i]
        return w

    def normalized_firing(self, X) -> np.ndarray:
        w = self.firing(X)
        total = w.sum(axis=1, keepdims=True)
        return np.divide(w, total, out=np.zeros_like(w), where=total > 0)

    def consequent_inputs(self, X) -> np.ndarray:
        X = self._check(X)
        z = normalize_inputs(X, self.centers) if self.normalize else X
        return np.column_stack((z, np.ones(z.shape[0])))

    def design(self, X) -> np.ndarray:
        """Output is linear in the consequents: ``forward(X) = design(X) @ consequents.ravel()``."""
        wn = self.normalized_firing(X)
        z = self.consequent_inputs(X)
        return (wn[:, :, None] * z[:, None, :]).reshape(z.shape[0], -1)

    def forward(self, X) -> np.ndarray:
        wn = self.normalized_firing(X)
        f = self.consequent_inputs(X) @ self.consequents.T
        return np.sum(wn * f, axis=1)

    def to_dict(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "steepness": self.steepness.tolist(),
            "rules": [list(r) for r in self.rules],
            "consequents": self.consequents.tolist(),
            "normalize": self.normalize,
            "threshold": self.threshold,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnfisModel":
        return cls(d["centers"], d["steepness"], d["rules"], d["consequents"], d.get("normalize", True), float(d.get("threshold", 0.5)), dict(d.get("meta", {})))


def anfis_forward(m: AnfisModel, v) -> np.ndarray:
    """Firing-weighted average of the rule consequents (0 where no rule fires)."""
    return m.forward(v)


def anfis_loss_and_grad(m: AnfisModel, X, y):
    """Half mean squared error and its gradient w.r.t. the consequents.

    The gradient is back-propagated through the normalized-firing layer:
    ``dL/dc[r, j] = mean(residual * wbar_r * z_j)``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    wn = m.normalized_firing(X)
    z = m.consequent_inputs(X)
    out = np.sum(wn * (z @ m.consequents.T), axis=1)
    resid = out - y
    loss = 0.5 * float(np.mean(resid * resid))
    grad = (wn * resid[:, None]).T @ z / y.size
    return loss, grad


def train_anfis(
    X,
    y,
    thresholds=None,
    rules=None,
    steepness=None,
    normalize=True,
    max_iter=20000,
    tol=1e-12,
    seed=0,
    min_threshold=1e-3,
):
    """Fit consequents by gradient descent; memberships stay at their thresholds.

    The step size is the inverse Lipschitz constant of the squared-error
    gradient, so every iteration decreases the loss. The output decision
    threshold is then fit for maximum training F1. Returns
    ``(model, loss_curve)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if np.unique(y).size < 2:
        raise DegenerateDataError("training data must contain both classes")
    if thresholds is None:
        thresholds = fit_column_thresholds(X, y.astype(bool), min_threshold=min_threshold)
    t = np.asarray(thresholds, dtype=float).reshape(-1)
    if t.size != X.shape[1] or np.any(t <= 0):
        raise InvalidInputError("membership centers must be positive, one per input")
    k = 4.0 / t if steepness is None else np.broadcast_to(np.asarray(steepness, dtype=float), t.shape).copy()
    rules = default_rules(t.size) if rules is None else rules
    rng = np.random.default_rng(seed)
    init = rng.normal(scale=0.01, size=(len(rules), t.size + 1))
    m = AnfisModel(t, k, rules, init, normalize)
    Phi = m.design(X)
    lip = float(np.linalg.eigvalsh(Phi.T @ Phi / y.size).max()) if Phi.size else 0.0
    step = 1.0 / lip if lip > 0 else 0.0
    curve = []
    for _ in range(int(max_iter)):
        loss, grad = anfis_loss_and_grad(m, X, y)
        curve.append(loss)
        if step == 0.0 or float(np.sum(grad * grad)) < tol:
            break
        m.consequents -= step * grad
    else:
        curve.append(anfis_loss_and_grad(m, X, y)[0])
    m.threshold = fit_threshold(m.forward(X), y.astype(bool), integer=False).threshold
    return m, curve


class AnfisClassifier(ClassifierMixin, BaseEstimator):
    """Sklearn-style wrapper over :func:`train_anfis`.

    Parameters
    ----------
    thresholds : array-like or None
        Membership centers; F1-fitted per input when ``None``.
    rules : list of tuples or None
        Antecedent specs; :func:`default_rules` when ``None``.
    steepness : float, array-like or None
        Membership slopes; ``4 / threshold`` when ``None``.
    normalize : bool
        Feed threshold-scaled inputs to the linear consequents.
    max_iter, tol : gradient-descent stopping rule.
    random_state : int
        Seeds consequent initialization.
    """

    def __init__(self, thresholds=None, rules=None, steepness=None, normalize=True, max_iter=20000, tol=1e-12, random_state=0):
        self.thresholds = thresholds
        self.rules = rules
        self.steepness = steepness
        self.normalize = normalize
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = np.asarray(y).astype(int)
        self.model_, self.loss_curve_ = train_anfis(
            X, y, self.thresholds, self.rules, self.steepness, self.normalize, self.max_iter, self.tol, self.random_state
        )
        self.threshold_ = self.model_.threshold
        self.final_loss_ = self.loss_curve_[-1]
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return self.model_.forward(check_array(X, dtype=float))

    def predict(self, X):
        return (self.decision_function(X) >= self.threshold_).astype(int)

    def to_dict(self) -> dict:
        check_is_fitted(self, "model_")
        return {"kind": "anfis", "random_state": self.random_state, "final_loss": self.final_loss_, "model": self.model_.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "AnfisClassifier":
        est = cls(random_state=d.get("random_state", 0))
        est.model_ = AnfisModel.from_dict(d["model"])
        est.threshold_ = est.model_.threshold
        est.final_loss_ = d.get("final_loss")
        est.loss_curve_ = []
        est.n_features_in_ = est.model_.n_inputs
        est.classes_ = np.array([0, 1])
        return est

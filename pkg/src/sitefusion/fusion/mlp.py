"""Fully connected binary classifier trained by backpropagation with Adam."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..dta import fit_threshold
from ..exceptions import DegenerateDataError, InvalidInputError
from .normalize import ThresholdScaler

ACTIVATIONS = ("tanh", "relu", "logistic")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "logistic":
        return _sigmoid(z)
    raise InvalidInputError(f"unknown activation {name!r}")


def _act_grad(name, z, a):
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0).astype(float)
    return a * (1.0 - a)


@dataclass
class MlpModel:
    """Weights of a ``[d, h1, ..., 1]`` network with a logistic output unit."""

    weights: list
    biases: list
    activation: str = "tanh"
    meta: dict = dc_field(default_factory=dict)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def logits(self, X) -> np.ndarray:
        a = np.asarray(X, dtype=float)
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            a = _act(self.activation, a @ W + b)
        return (a @ self.weights[-1] + self.biases[-1])[:, 0]

    def forward(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.weights[0].shape[0]:
            raise InvalidInputError(f"expected {self.weights[0].shape[0]} features, got {X.shape[1]}")
        return _sigmoid(self.logits(X))

    def to_dict(self) -> dict:
        return {
            "layer_sizes": self.layer_sizes,
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        return cls(
            [np.asarray(w, dtype=float) for w in d["weights"]],
            [np.asarray(b, dtype=float) for b in d["biases"]],
            d.get("activation", "tanh"),
            dict(d.get("meta", {})),
        )


def init_mlp(layer_sizes, activation="tanh", seed=0) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, activation)


def mlp_loss_and_grad(model: MlpModel, X, y, l2: float = 0.0):
    """Mean binary cross-entropy and its gradients.

    Returns ``(loss, grad_weights, grad_biases)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = X.shape[0]
    zs, acts = [], [X]
    a = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = a @ W + b
        a = _act(model.activation, z)
        zs.append(z)
        acts.append(a)
    logit = (a @ model.weights[-1] + model.biases[-1])[:, 0]
    # softplus(z) - y*z, written to stay finite for large |z|
    loss = np.mean(np.maximum(logit, 0) - logit * y + np.log1p(np.exp(-np.abs(logit))))
    if l2:
        loss += 0.5 * l2 * sum(float(np.sum(W * W)) for W in model.weights) / n
    delta = ((_sigmoid(logit) - y) / n)[:, None]
    gW = [None] * len(model.weights)
    gb = [None] * len(model.biases)
    for k in range(len(model.weights) - 1, -1, -1):
        gW[k] = acts[k].T @ delta + (l2 / n) * model.weights[k]
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k].T) * _act_grad(model.activation, zs[k - 1], acts[k])
    return float(loss), gW, gb


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train_mlp(X, y, hidden=(100, 100), activation="tanh", learning_rate=1e-3, epochs=200, batch_size=32, l2=0.0, seed=0):
    """Mini-batch Adam training. Returns ``(model, loss_curve)``.

    ``loss_curve[i]`` is the full-data loss after epoch ``i``; entry 0 is
    the loss at initialization.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if np.unique(y).size < 2:
        raise DegenerateDataError("training data must contain both classes")
    rng = np.random.default_rng(seed)
    model = init_mlp([X.shape[1], *hidden, 1], activation, seed=int(rng.integers(2**31)))
    params = model.weights + model.biases
    opt = _Adam(params, learning_rate)
    curve = [mlp_loss_and_grad(model, X, y, l2)[0]]
    n = X.shape[0]
    bs = n if not batch_size or batch_size >= n else int(batch_size)
    for _ in range(int(epochs)):
        order = rng.permutation(n)
        for s in range(0, n, bs):
            idx = order[s : s + bs]
            _, gW, gb = mlp_loss_and_grad(model, X[idx], y[idx], l2)
            opt.step(params, gW + gb)
        curve.append(mlp_loss_and_grad(model, X, y, l2)[0])
    return model, curve


class MLPFusionClassifier(ClassifierMixin, BaseEstimator):
    """Two-hidden-layer perceptron over per-component feature vectors.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
    activation : {'tanh', 'relu', 'logistic'}
        Hidden-unit nonlinearity; the output unit is always logistic.
    learning_rate, epochs, batch_size, l2 : training hyperparameters (Adam).
    random_state : int
        Seeds initialization and batch order.
    normalize : bool
        Scale inputs with :class:`ThresholdScaler` before training.
    thresholds : array-like or None
        Thresholds for the scaler; F1-fitted on the training data if None.
    decision_threshold : float or 'dta'
        Probability cut for :meth:`predict`; ``'dta'`` fits it for maximum
        training F1.
    """

    def __init__(
        self,
        hidden_layer_sizes=(100, 100),
        activation="tanh",
        learning_rate=1e-3,
        epochs=200,
        batch_size=32,
        l2=0.0,
        random_state=0,
        normalize=False,
        thresholds=None,
        decision_threshold=0.5,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.l2 = l2
        self.random_state = random_state
        self.normalize = normalize
        self.thresholds = thresholds
        self.decision_threshold = decision_threshold

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = np.asarray(y).astype(int)
        if np.unique(y).size < 2:
            raise DegenerateDataError("training data must contain both classes")
        if self.activation not in ACTIVATIONS:
            raise InvalidInputError(f"unknown activation {self.activation!r}")
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        if self.normalize:
            self.scaler_ = ThresholdScaler(self.thresholds, min_threshold=1e-3).fit(X, y)
            Xt = self.scaler_.transform(X)
        else:
            self.scaler_ = None
            Xt = X
        self.model_, self.loss_curve_ = train_mlp(
            Xt, y, tuple(self.hidden_layer_sizes), self.activation, self.learning_rate, self.epochs, self.batch_size, self.l2, self.random_state
        )
        self.final_loss_ = self.loss_curve_[-1]
        if self.decision_threshold == "dta":
            self.threshold_ = fit_threshold(self.model_.forward(Xt), y, integer=False).threshold
        else:
            self.threshold_ = float(self.decision_threshold)
        return self

    def _inputs(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return self.scaler_.transform(X) if self.scaler_ is not None else X

    def decision_function(self, X):
        return self.model_.forward(self._inputs(X))

    def predict_proba(self, X):
        p = self.decision_function(X)
        return np.column_stack((1.0 - p, p))

    def predict(self, X):
        return (self.decision_function(X) >= self.threshold_).astype(int)

    def to_dict(self) -> dict:
        check_is_fitted(self, "model_")
        return {
            "kind": "mlp",
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.get_params().items() if k != "thresholds"},
            "scaler_thresholds": None if self.scaler_ is None else self.scaler_.thresholds_.tolist(),
            "threshold": self.threshold_,
            "final_loss": self.final_loss_,
            "network": self.model_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MLPFusionClassifier":
        params = dict(d["params"])
        params["hidden_layer_sizes"] = tuple(params["hidden_layer_sizes"])
        est = cls(**params)
        est.model_ = MlpModel.from_dict(d["network"])
        est.n_features_in_ = est.model_.layer_sizes[0]
        est.classes_ = np.array([0, 1])
        st = d.get("scaler_thresholds")
        est.scaler_ = None if st is None else ThresholdScaler(st).fit(np.ones((1, len(st))))
        est.threshold_ = float(d["threshold"])
        est.final_loss_ = d.get("final_loss")
        est.loss_curve_ = []
        return est


def predict_mlp(model, v) -> np.ndarray:
    """Output probabilities of an :class:`MlpModel` or fitted classifier."""
    if isinstance(model, MLPFusionClassifier):
        return model.decision_function(np.atleast_2d(v))
    return model.forward(v)

"""Apply a fitted fusion model to candidate feature tables."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from ..classes import COMBOS
from ..exceptions import InvalidInputError
from ..features import CandidateFeatures, feature_matrix
from .anfis import AnfisClassifier
from .gates import OrGateClassifier
from .mlp import MLPFusionClassifier

MODELS = {"or": OrGateClassifier, "mlp": MLPFusionClassifier, "anfis": AnfisClassifier}


class DecisionRecord(NamedTuple):
    candidate_id: int
    decision: bool
    score: float
    model: str
    combo: str
    feature_type: str


class FusionResult(NamedTuple):
    kept: list
    records: list


def combo_classes(combo: str) -> tuple:
    try:
        return COMBOS[combo]
    except KeyError:
        raise InvalidInputError(f"unknown combo {combo!r}; expected one of {sorted(COMBOS)}") from None


def model_name(model) -> str:
    for name, cls in MODELS.items():
        if isinstance(model, cls):
            return name
    return type(model).__name__


def _model_class(kind: str):
    try:
        return MODELS[kind]
    except KeyError:
        raise InvalidInputError(f"unknown model {kind!r}; expected one of {sorted(MODELS)}") from None


def make_model(kind: str, **params):
    return _model_class(kind)(**params)


def model_from_dict(d: dict):
    return _model_class(d["kind"]).from_dict(d)


def fit_fusion(model, features: Sequence[CandidateFeatures], combo: str, feature_type: str):
    """Fit ``model`` on labeled candidate features for one combo/feature type."""
    X, y, _ = feature_matrix(features, combo_classes(combo), feature_type)
    if y is None:
        raise InvalidInputError("training candidates must all be labeled")
    return model.fit(X, y.astype(int))


def fuse_candidates(candidates: Sequence[CandidateFeatures], model, combo: str, feature_type: str) -> FusionResult:
    """Keep the candidates whose fused decision is positive.

    ``model`` is a fitted :class:`OrGateClassifier`,
    :class:`MLPFusionClassifier` or :class:`AnfisClassifier`.
    """
    X, _, ids = feature_matrix(candidates, combo_classes(combo), feature_type)
    if len(candidates) == 0:
        return FusionResult([], [])
    decisions = model.predict(X).astype(bool)
    scores = np.asarray(model.decision_function(X), dtype=float)
    name = model_name(model)
    records = [
        DecisionRecord(int(i), bool(d), float(s), name, combo, feature_type) for i, d, s in zip(ids, decisions, scores)
    ]
    kept = [c for c, d in zip(candidates, decisions) if d]
    return FusionResult(kept, records)

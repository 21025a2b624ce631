"""Weighted spatial score fusion for re-ranking candidate sites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .classes import COMBO_LP, EMPTY_LP, MISSILE, SITE, TEL, TEL_GROUP
from .exceptions import InvalidInputError, UndefinedMetricError
from .features import Candidate, CandidateFeatures
from .geo import DistanceModel, distances_from


@dataclass(frozen=True)
class WeightProfile:
    weights: Mapping[str, float] = dc_field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        w = {str(k): float(v) for k, v in dict(self.weights).items()}
        if any(v < 0 or not math.isfinite(v) for v in w.values()):
            raise InvalidInputError("weights must be finite and nonnegative")
        if not any(v > 0 for v in w.values()):
            raise InvalidInputError("at least one weight must be nonzero")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, cls: str) -> float:
        return self.weights.get(cls, 0.0)

    @classmethod
    def uniform(cls, classes=(SITE, EMPTY_LP, COMBO_LP, MISSILE, TEL, TEL_GROUP)) -> "WeightProfile":
        return cls({k: 1.0 for k in classes}, "uniform")

    @classmethod
    def expert(cls) -> "WeightProfile":
        return cls({SITE: 1.0, EMPTY_LP: 4.0, COMBO_LP: 4.0, MISSILE: 1.0, TEL: 1.0, TEL_GROUP: 2.0}, "expert")

    def scaled(self, factor: float) -> "WeightProfile":
        return WeightProfile({k: v * factor for k, v in self.weights.items()}, self.name)

    def to_dict(self) -> dict:
        return {"name": self.name, "weights": dict(sorted(self.weights.items()))}


def fused_score(c: Candidate, clusters_by_class: Mapping[str, Sequence], w: WeightProfile, radius: float = 150.0, model: DistanceModel | None = None) -> float:
    """``w_site * site_score + sum_k w_k * (scores of class-k clusters within radius)``."""
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    model = model or DistanceModel()
    terms = [w[SITE] * c.site_score]
    x0, y0 = c.location
    for cls, clusters in clusters_by_class.items():
        if cls == SITE or not clusters or w[cls] == 0:
            continue
        cx = np.array([k.location[0] for k in clusters])
        cy = np.array([k.location[1] for k in clusters])
        inside = distances_from(x0, y0, cx, cy, model) < radius
        terms.append(w[cls] * math.fsum(k.score for k, ok in zip(clusters, inside) if ok))
    return math.fsum(terms)


def fused_score_from_features(c: Candidate, feats: CandidateFeatures, w: WeightProfile) -> float:
    """Same sum, reading per-class cluster-score sums already extracted at the fusion radius."""
    terms = [w[SITE] * c.site_score]
    for cls, v in sorted(feats.values.items()):
        if cls != SITE and w[cls]:
            terms.append(w[cls] * v.cluster_score_sum)
    return math.fsum(terms)


class RankedCandidate(NamedTuple):
    rank: int
    candidate_id: int
    fused_score: float
    is_tp: bool | None


def rerank(candidates: Sequence[Candidate], scores: Sequence[float]) -> list[RankedCandidate]:
    """Order candidates by fused score, descending; ties by candidate id."""
    if len(candidates) != len(scores):
        raise InvalidInputError("one score per candidate required")
    order = sorted(range(len(candidates)), key=lambda i: (-float(scores[i]), candidates[i].id))
    return [RankedCandidate(r, candidates[i].id, float(scores[i]), candidates[i].label) for r, i in enumerate(order, 1)]


def avg_tp_rank(ranked: Sequence[RankedCandidate], truth: Mapping[int, bool] | None = None) -> float:
    """Mean 1-based rank of the true positives."""
    if truth is None:
        tps = [r.rank for r in ranked if r.is_tp]
    else:
        tps = [r.rank for r in ranked if truth.get(r.candidate_id, False)]
    if not tps:
        raise UndefinedMetricError("no true positives in the ranking")
    return sum(tps) / len(tps)

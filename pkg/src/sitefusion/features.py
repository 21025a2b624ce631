"""Per-candidate component features within the fusion radius."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .cluster import Cluster, ClusterParams, cluster_detections
from .exceptions import InvalidInputError
from .field import DetectionField
from .geo import Point, distances_from

FEATURE_TYPES = ("raw-max", "raw-count", "cluster-count", "cluster-score-sum")
INTEGER_FEATURES = ("raw-count", "cluster-count")


def feature_attr(feature_type: str) -> str:
    if feature_type not in FEATURE_TYPES:
        raise InvalidInputError(f"unknown feature type {feature_type!r}; expected one of {FEATURE_TYPES}")
    return feature_type.replace("-", "_")


@dataclass
class Candidate:
    id: int
    location: Point
    site_score: float = 0.0
    label: bool | None = None
    source: str = "scan"


class ComponentValues(NamedTuple):
    raw_max: float = 0.0
    raw_count: int = 0
    cluster_count: int = 0
    cluster_score_sum: float = 0.0


@dataclass
class CandidateFeatures:
    candidate_id: int
    values: dict = dc_field(default_factory=dict)
    label: bool | None = None

    def get(self, cls: str, feature_type: str) -> float:
        try:
            return getattr(self.values[cls], feature_attr(feature_type))
        except KeyError:
            raise InvalidInputError(f"candidate {self.candidate_id} has no features for class {cls!r}") from None


def box_mask(f: DetectionField, center, box: float) -> np.ndarray:
    """Detections inside the ``box`` x ``box`` meter square around ``center``."""
    half = box / 2.0
    if f.model.spherical:
        m_per_deg = f.model.sphere_radius * math.pi / 180.0
        dy = (f.y - center[1]) * m_per_deg
        dlon = (f.x - center[0] + 180.0) % 360.0 - 180.0
        dx = dlon * m_per_deg * math.cos(math.radians(center[1]))
    else:
        dx = f.x - center[0]
        dy = f.y - center[1]
    return (np.abs(dx) <= half) & (np.abs(dy) <= half)


def extract_features(
    c: Candidate,
    fields_by_class: Mapping[str, DetectionField],
    clusters_by_class: Mapping[str, Sequence[Cluster]],
    fusion_radius: float = 150.0,
    alphas: float | Mapping[str, float] = 0.99,
    classes: Sequence[str] | None = None,
) -> CandidateFeatures:
    """Four feature values per component class around candidate ``c``.

    ``raw_max`` reads the uncut field, ``raw_count`` the alpha-cut field,
    and the cluster features count and sum the clusters whose centers lie
    within ``fusion_radius``. Membership is strict (``d < radius``).
    """
    if not fusion_radius > 0:
        raise InvalidInputError("fusion_radius must be positive")
    classes = list(fields_by_class) if classes is None else list(classes)
    unknown = [k for k in list(classes) + list(clusters_by_class) if k not in fields_by_class]
    if unknown:
        raise InvalidInputError(f"unknown class tag(s): {sorted(set(unknown))}")
    x0, y0 = c.location
    out = CandidateFeatures(c.id, label=c.label)
    for cls in classes:
        f = fields_by_class[cls]
        alpha = alphas[cls] if isinstance(alphas, Mapping) else alphas
        d = distances_from(x0, y0, f.x, f.y, f.model)
        near = d < fusion_radius
        s = f.scores[near]
        raw_max = float(s.max()) if s.size else 0.0
        raw_count = int(np.count_nonzero(s >= alpha))
        cl = clusters_by_class.get(cls, ())
        if cl:
            cx = np.array([k.location[0] for k in cl])
            cy = np.array([k.location[1] for k in cl])
            inside = distances_from(x0, y0, cx, cy, f.model) < fusion_radius
            chosen = [k.score for k, ok in zip(cl, inside) if ok]
        else:
            chosen = []
        out.values[cls] = ComponentValues(raw_max, raw_count, len(chosen), math.fsum(chosen))
    return out


class CandidateScanner:
    """Crops component fields to candidate tiles and clusters each tile.

    Mirrors scanning a fixed-size tile around every candidate: clusters
    are computed from detections inside the ``box`` only.
    """

    def __init__(
        self,
        fields_by_class: Mapping[str, DetectionField],
        params_by_class: Mapping[str, ClusterParams],
        fusion_radius: float = 150.0,
        box: float = 640.0,
    ):
        missing = [k for k in fields_by_class if k not in params_by_class]
        if missing:
            raise InvalidInputError(f"no cluster parameters for class(es) {missing}")
        if not box > 0:
            raise InvalidInputError("box must be positive")
        self.fields = dict(fields_by_class)
        self.params = dict(params_by_class)
        self.fusion_radius = fusion_radius
        self.box = box
        self._index = {k: f.index(box / 2.0) for k, f in self.fields.items()}

    def tile(self, cls: str, center) -> DetectionField:
        f = self.fields[cls]
        reach = self.box / 2.0 * math.sqrt(2.0) * 1.01
        if f.model.spherical:
            reach = min(reach, math.pi * f.model.sphere_radius)
        pos, _ = self._index[cls].query(center, reach) if len(f) else (np.empty(0, np.int64), None)
        pos = np.sort(pos)
        sub = f.subset(pos)
        return sub.subset(box_mask(sub, center, self.box))

    def scan(self, c: Candidate) -> tuple[CandidateFeatures, dict]:
        tiles = {k: self.tile(k, c.location) for k in self.fields}
        clusters = {k: cluster_detections(t, self.params[k]) for k, t in tiles.items()}
        alphas = {k: self.params[k].alpha for k in self.fields}
        feats = extract_features(c, tiles, clusters, self.fusion_radius, alphas)
        return feats, clusters

    def features(self, candidates: Sequence[Candidate]) -> list[CandidateFeatures]:
        return [self.scan(c)[0] for c in candidates]


def feature_matrix(features: Sequence[CandidateFeatures], classes: Sequence[str], feature_type: str):
    """Stack one feature type over ``classes`` into ``(X, y, ids)``.

    ``y`` is ``None`` unless every candidate carries a label.
    """
    feature_attr(feature_type)
    X = np.array([[f.get(k, feature_type) for k in classes] for f in features], dtype=float).reshape(len(features), len(classes))
    ids = np.array([f.candidate_id for f in features], dtype=np.int64)
    labels = [f.label for f in features]
    y = None if any(v is None for v in labels) else np.array(labels, dtype=bool)
    return X, y, ids

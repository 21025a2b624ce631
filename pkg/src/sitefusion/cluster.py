"""Greedy mode clustering of amplified detection fields with normalized scores.

A cluster's score is the weighted sum of its members' intersected volumes
divided by ``C_norm``, the approximate score of a saturated aperture, so
fields scanned at different strides land on a common scale near [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InvalidInputError
from .field import AmplifiedDetection, DetectionField, alpha_cut, amplify_array
from .geo import DistanceModel, Point

TRUNCATE = "truncate"
FLAT = "flat"
EXP = "exp"
PENALTY_MODES = (TRUNCATE, FLAT, EXP)
_ALIASES = {"exp-decay": EXP, "exp_decay": EXP}

# (2 - 5/e) from the ln^2 body integral plus the 1/e plateau
VOLUME_FACTOR = 2.0 - 4.0 / math.e


def canonical_penalty(mode: str) -> str:
    mode = _ALIASES.get(mode, mode)
    if mode not in PENALTY_MODES:
        raise InvalidInputError(f"unknown penalty mode {mode!r}")
    return mode


@dataclass(frozen=True)
class ClusterParams:
    R: float
    stride: float
    alpha: float = 0.0
    penalty: str = TRUNCATE
    membership_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "penalty", canonical_penalty(self.penalty))
        if not (self.R > 0 and self.stride > 0):
            raise InvalidInputError("R and stride must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError("alpha outside [0, 1]")
        if self.membership_radius is None:
            object.__setattr__(self, "membership_radius", self.R if self.penalty == TRUNCATE else 2.0 * self.R)
        if self.membership_radius < self.R:
            raise InvalidInputError("membership_radius must be >= R")

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "stride": self.stride,
            "alpha": self.alpha,
            "penalty": self.penalty,
            "membership_radius": self.membership_radius,
        }


class NormConstants(NamedTuple):
    r_prime: float
    n_volume: float
    n_max_p: float
    c_norm: float


def norm_constants(R: float, stride: float) -> NormConstants:
    """Density-normalized aperture constants.

    ``n_volume`` approximates the intersected volume of a detection in a
    saturated field, ``n_max_p`` the number of stride-grid points inside the
    aperture, and ``c_norm`` their product.
    """
    if not (R > 0 and stride > 0):
        raise InvalidInputError("R and stride must be positive")
    rp = R / stride
    disc = math.pi * rp * rp
    n_volume = disc * VOLUME_FACTOR
    return NormConstants(rp, n_volume, disc, n_volume * disc)


def penalty_weight(d, R: float, mode: str = TRUNCATE):
    """Member weight at distance ``d`` from the cluster seed.

    1 inside the aperture; beyond it 0 (truncate), -1 (flat) or
    ``-exp(-(2R - d)/R)`` (exp). Accepts scalars or arrays.
    """
    mode = canonical_penalty(mode)
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0):
        raise InvalidInputError("distance must be nonnegative")
    if mode == TRUNCATE:
        outer = np.zeros_like(d_arr)
    elif mode == FLAT:
        outer = -np.ones_like(d_arr)
    else:
        outer = -np.exp(-(2.0 * R - d_arr) / R)
    w = np.where(d_arr < R, 1.0, outer)
    return float(w) if np.ndim(d) == 0 else w


class Member(NamedTuple):
    id: int
    weight: float
    distance: float


@dataclass
class Cluster:
    id: int
    cls: str
    seed_id: int
    location: Point
    members: list
    raw_weighted_sum: float
    score: float
    rank: int = 0
    n_members: int | None = None  # set when read back without the member list

    @property
    def member_count(self) -> int:
        return len(self.members) if self.members or self.n_members is None else self.n_members


def _delta_array(fa: DetectionField, deltas) -> np.ndarray:
    if isinstance(deltas, np.ndarray) and deltas.dtype != object:
        arr = deltas.astype(float).reshape(-1)
        if arr.size != len(fa):
            raise InvalidInputError("deltas do not align with the field")
        return arr
    lookup = {int(a.id): float(a.delta) for a in (AmplifiedDetection(*t) for t in deltas)}
    try:
        return np.array([lookup[int(i)] for i in fa.ids], dtype=float)
    except KeyError as exc:
        raise InvalidInputError(f"no delta for detection {exc.args[0]}") from None


def cluster_field(fa: DetectionField, deltas, params: ClusterParams) -> list[Cluster]:
    """Greedy highest-density-first clustering of an alpha-cut field.

    Seeds are taken in order of decreasing intersected volume (ties by
    detection id). Each seed absorbs every still-unassigned detection
    closer than the membership radius; members are weighted by
    :func:`penalty_weight` and the normalized score is
    ``sum(weight * delta) / C_norm``. The result is sorted by score
    (descending, ties by seed id) with 1-based ranks.
    """
    n = len(fa)
    if n == 0:
        return []
    delta = _delta_array(fa, deltas)
    c_norm = norm_constants(params.R, params.stride).c_norm
    index = fa.index(params.membership_radius)
    order = np.lexsort((fa.ids, -delta))
    assigned = np.zeros(n, dtype=bool)
    clusters = []
    for p in order:
        if assigned[p]:
            continue
        pos, d = index.query((fa.x[p], fa.y[p]), params.membership_radius)
        free = ~assigned[pos]
        pos, d = pos[free], d[free]
        assigned[pos] = True
        w = penalty_weight(d, params.R, params.penalty)
        raw = math.fsum((w * delta[pos]).tolist())
        inner = w == 1.0
        dw = delta[pos][inner]
        total = math.fsum(dw.tolist())
        if inner.sum() > 1 and total > 0:
            loc = Point(
                math.fsum((dw * fa.x[pos][inner]).tolist()) / total,
                math.fsum((dw * fa.y[pos][inner]).tolist()) / total,
            )
        else:
            loc = Point(float(fa.x[p]), float(fa.y[p]))
        members = [Member(int(fa.ids[q]), float(wq), float(dq)) for q, wq, dq in zip(pos, w, d)]
        clusters.append(
            Cluster(
                id=len(clusters),
                cls=fa.cls,
                seed_id=int(fa.ids[p]),
                location=loc,
                members=members,
                raw_weighted_sum=raw,
                score=raw / c_norm,
            )
        )
    clusters.sort(key=lambda c: (-c.score, c.seed_id))
    for i, c in enumerate(clusters, 1):
        c.rank = i
    return clusters


def top_k(clusters: Sequence[Cluster], k: int) -> list[Cluster]:
    """The ``k`` best clusters by score, ties broken by seed id."""
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    return sorted(clusters, key=lambda c: (-c.score, c.seed_id))[:k]


def cluster_detections(f: DetectionField, params: ClusterParams) -> list[Cluster]:
    """Alpha-cut, amplify and cluster a raw field in one call."""
    fa = alpha_cut(f, params.alpha)
    return cluster_field(fa, amplify_array(fa, params.R), params)


class ModeClustering(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`cluster_detections`.

    ``X`` holds detection coordinates (n_samples, 2) and ``sample_weight``
    the detector confidences. After fitting, ``labels_`` gives each
    detection's 0-based cluster rank (``-1`` for detections removed by the
    alpha-cut), and ``cluster_centers_`` / ``cluster_scores_`` follow rank
    order.

    Parameters
    ----------
    R : float
        Aperture radius in meters.
    stride : float
        Detector scan stride in meters.
    alpha : float
        Alpha-cut applied before clustering.
    penalty : {'truncate', 'flat', 'exp'}
    membership_radius : float or None
        Defaults to ``R`` for truncate, ``2R`` otherwise.
    distance : {'planar', 'haversine'}
    """

    def __init__(self, R=32.0, stride=16.0, alpha=0.99, penalty=TRUNCATE, membership_radius=None, distance="planar"):
        self.R = R
        self.stride = stride
        self.alpha = alpha
        self.penalty = penalty
        self.membership_radius = membership_radius
        self.distance = distance

    def _params(self) -> ClusterParams:
        return ClusterParams(self.R, self.stride, self.alpha, self.penalty, self.membership_radius)

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise InvalidInputError("X must have two columns (x, y)")
        n = X.shape[0]
        scores = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float).reshape(-1)
        if scores.size != n:
            raise InvalidInputError("sample_weight length mismatch")
        field = DetectionField("points", float(self.stride), DistanceModel(self.distance), np.arange(n), X[:, 0], X[:, 1], scores)
        params = self._params()
        self.params_ = params
        self.norm_ = norm_constants(params.R, params.stride)
        self.clusters_ = cluster_detections(field, params)
        labels = np.full(n, -1, dtype=np.int64)
        for c in self.clusters_:
            labels[[m.id for m in c.members]] = c.rank - 1
        self.labels_ = labels
        self.cluster_centers_ = np.array([list(c.location) for c in self.clusters_]).reshape(-1, 2)
        self.cluster_scores_ = np.array([c.score for c in self.clusters_])
        return self

    def top_k(self, k):
        check_is_fitted(self, "clusters_")
        return top_k(self.clusters_, k)

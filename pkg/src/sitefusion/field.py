"""Raw detection fields, alpha-cuts and the amplified detection field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import InvalidInputError
from .geo import DistanceModel, Point, SpatialIndex, validate_coords


@dataclass(frozen=True)
class RawDetection:
    id: int
    location: Point
    score: float
    cls: str
    tile: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise InvalidInputError(f"detection {self.id}: score {self.score} outside [0, 1]")


class AmplifiedDetection(NamedTuple):
    id: int
    delta: float


@dataclass
class DetectionField:
    """All detections of one class, stored column-wise.

    ``stride`` is the scan stride (meters) of the detector that produced
    the field; it sets the density used for score normalization.
    """

    cls: str
    stride: float
    model: DistanceModel = dc_field(default_factory=DistanceModel)
    ids: np.ndarray = dc_field(default_factory=lambda: np.empty(0, dtype=np.int64))
    x: np.ndarray = dc_field(default_factory=lambda: np.empty(0))
    y: np.ndarray = dc_field(default_factory=lambda: np.empty(0))
    scores: np.ndarray = dc_field(default_factory=lambda: np.empty(0))
    tiles: list = dc_field(default_factory=list)

    def __post_init__(self):
        if not (self.stride > 0 and math.isfinite(self.stride)):
            raise InvalidInputError("stride must be positive")
        self.ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.scores = np.asarray(self.scores, dtype=float).reshape(-1)
        n = self.ids.size
        if not (self.x.size == self.y.size == self.scores.size == n):
            raise InvalidInputError("field columns differ in length")
        if not self.tiles:
            self.tiles = [None] * n
        elif len(self.tiles) != n:
            raise InvalidInputError("tiles column length mismatch")
        validate_coords(self.x, self.y, self.model)
        if n and (np.any(~np.isfinite(self.scores)) or self.scores.min() < 0 or self.scores.max() > 1):
            raise InvalidInputError("scores must lie in [0, 1]")
        if np.unique(self.ids).size != n:
            raise InvalidInputError("detection ids must be unique")

    @classmethod
    def from_detections(cls, detections: Sequence[RawDetection], stride: float, model=None, tag=None):
        detections = list(detections)
        if tag is None:
            if not detections:
                raise InvalidInputError("class tag required for an empty field")
            tag = detections[0].cls
        if any(d.cls != tag for d in detections):
            raise InvalidInputError("all detections in a field must share one class tag")
        return cls(
            cls=tag,
            stride=stride,
            model=model or DistanceModel(),
            ids=[d.id for d in detections],
            x=[d.location.x for d in detections],
            y=[d.location.y for d in detections],
            scores=[d.score for d in detections],
            tiles=[d.tile for d in detections],
        )

    def __len__(self):
        return self.ids.size

    @property
    def detections(self) -> list[RawDetection]:
        return [
            RawDetection(int(i), Point(float(a), float(b)), float(s), self.cls, t)
            for i, a, b, s, t in zip(self.ids, self.x, self.y, self.scores, self.tiles)
        ]

    def subset(self, mask) -> "DetectionField":
        mask = np.asarray(mask)
        if mask.dtype == bool:
            keep = np.nonzero(mask)[0]
        else:
            keep = mask.astype(np.int64)
        return DetectionField(
            cls=self.cls,
            stride=self.stride,
            model=self.model,
            ids=self.ids[keep],
            x=self.x[keep],
            y=self.y[keep],
            scores=self.scores[keep],
            tiles=[self.tiles[i] for i in keep.tolist()],
        )

    def index(self, cell_size: float) -> SpatialIndex:
        return SpatialIndex(self.x, self.y, self.ids, self.model, cell_size)


def alpha_cut(f: DetectionField, alpha: float) -> DetectionField:
    """Keep detections with ``score >= alpha``."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha {alpha} outside [0, 1]")
    return f.subset(f.scores >= alpha)


def amplify_array(fa: DetectionField, R: float, index: SpatialIndex | None = None) -> np.ndarray:
    """Per-detection intersected volume, aligned with ``fa``'s row order."""
    if not (R > 0 and math.isfinite(R)):
        raise InvalidInputError("aperture radius R must be positive")
    n = len(fa)
    out = np.empty(n)
    if n == 0:
        return out
    index = index or fa.index(R)
    for i in range(n):
        pos, d = index.query((fa.x[i], fa.y[i]), R)
        # fsum is exactly rounded, so the value does not depend on row order
        out[i] = math.fsum((fa.scores[pos] * np.exp(-d / R)).tolist())
    return out


def amplify(fa: DetectionField, R: float) -> list[AmplifiedDetection]:
    """Distance-decay weighted neighborhood score sums for an alpha-cut field.

    Each detection's own score enters with weight ``exp(0) = 1``, so an
    isolated detection keeps its score.
    """
    deltas = amplify_array(fa, R)
    return [AmplifiedDetection(int(i), float(v)) for i, v in zip(fa.ids, deltas)]

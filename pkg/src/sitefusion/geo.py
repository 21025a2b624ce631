"""Distance models and a uniform-grid radius index.

Membership everywhere in this package is strict: a point at exactly the
query radius is outside the neighborhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidInputError

EARTH_RADIUS_M = 6_371_008.8

HAVERSINE = "haversine"
PLANAR = "planar"


class Point(NamedTuple):
    """Longitude/latitude in degrees (haversine) or east/north in meters (planar)."""

    x: float
    y: float


@dataclass(frozen=True)
class DistanceModel:
    kind: str = PLANAR
    sphere_radius: float = EARTH_RADIUS_M

    def __post_init__(self):
        if self.kind not in (HAVERSINE, PLANAR):
            raise InvalidInputError(f"unknown distance model {self.kind!r}")
        if not (self.sphere_radius > 0 and math.isfinite(self.sphere_radius)):
            raise InvalidInputError("sphere_radius must be positive and finite")

    @property
    def spherical(self) -> bool:
        return self.kind == HAVERSINE

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sphere_radius": self.sphere_radius}

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceModel":
        return cls(kind=d.get("kind", PLANAR), sphere_radius=float(d.get("sphere_radius", EARTH_RADIUS_M)))


def validate_coords(x, y, model: DistanceModel) -> None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite coordinates")
    if model.spherical:
        if np.any(np.abs(y) > 90.0) or np.any(np.abs(x) > 180.0):
            raise InvalidInputError("longitude/latitude out of range")


def distance(a, b, model: DistanceModel | None = None) -> float:
    """Distance in meters between two points under ``model``.

    >>> distance(Point(0, 0), Point(3, 4))
    5.0
    """
    model = model or DistanceModel()
    validate_coords([a[0], b[0]], [a[1], b[1]], model)
    return float(distances_from(a[0], a[1], np.array([b[0]], float), np.array([b[1]], float), model)[0])


def distances_from(x0: float, y0: float, xs: np.ndarray, ys: np.ndarray, model: DistanceModel) -> np.ndarray:
    """Vectorized distance from one point to many (no validation)."""
    if not model.spherical:
        return np.hypot(xs - x0, ys - y0)
    lat0 = math.radians(y0)
    lat = np.radians(ys)
    dlat = lat - lat0
    dlon = np.radians(xs - x0)
    a = np.sin(dlat / 2.0) ** 2 + math.cos(lat0) * np.cos(lat) * np.sin(dlon / 2.0) ** 2
    a = np.clip(a, 0.0, 1.0)
    return 2.0 * model.sphere_radius * np.arctan2(np.sqrt(a), np.sqrt(1.0 - a))


def _unit_xyz(xs, ys, radius):
    lon = np.radians(xs)
    lat = np.radians(ys)
    c = np.cos(lat)
    return np.column_stack((radius * c * np.cos(lon), radius * c * np.sin(lon), radius * np.sin(lat)))


class SpatialIndex:
    """Immutable uniform-grid bucket index over a point set.

    Planar points are bucketed on (x, y). Spherical points are bucketed on
    their 3-D Cartesian position scaled by the sphere radius; an arc radius
    maps monotonically to a chord radius, so the cell scan stays a superset
    and the exact model distance decides membership.

    Parameters
    ----------
    xs, ys : array-like
        Coordinates.
    ids : array-like of int, optional
        Payload ids returned by queries; defaults to ``arange(n)``.
    model : DistanceModel
    cell_size : float
        Bucket edge in meters; the natural choice is the usual query radius.
    """

    def __init__(self, xs, ys, ids=None, model: DistanceModel | None = None, cell_size: float = 32.0):
        self.model = model or DistanceModel()
        self.xs = np.ascontiguousarray(xs, dtype=float).reshape(-1)
        self.ys = np.ascontiguousarray(ys, dtype=float).reshape(-1)
        if self.xs.shape != self.ys.shape:
            raise InvalidInputError("xs and ys differ in length")
        validate_coords(self.xs, self.ys, self.model)
        n = self.xs.size
        self.ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64).reshape(-1)
        if self.ids.size != n:
            raise InvalidInputError("ids length mismatch")
        if not (cell_size > 0 and math.isfinite(cell_size)):
            raise InvalidInputError("cell_size must be positive")
        self.cell_size = float(cell_size)
        if self.model.spherical:
            self._coords = _unit_xyz(self.xs, self.ys, self.model.sphere_radius)
        else:
            self._coords = np.column_stack((self.xs, self.ys))
        self._buckets: dict[tuple, np.ndarray] = {}
        if n:
            keys = np.floor(self._coords / self.cell_size).astype(np.int64)
            order = np.lexsort(keys.T[::-1])
            keys = keys[order]
            change = np.any(np.diff(keys, axis=0) != 0, axis=1)
            starts = np.concatenate(([0], np.nonzero(change)[0] + 1))
            ends = np.concatenate((starts[1:], [n]))
            for s, e in zip(starts, ends):
                self._buckets[tuple(keys[s].tolist())] = order[s:e]
        self._all = np.arange(n)

    def __len__(self):
        return self.xs.size

    def _candidates(self, x0: float, y0: float, r: float) -> np.ndarray:
        if self.model.spherical:
            R = self.model.sphere_radius
            if r >= math.pi * R:
                return self._all
            center = _unit_xyz(np.array([x0]), np.array([y0]), R)[0]
            reach = 2.0 * R * math.sin(r / (2.0 * R)) * (1.0 + 1e-9) + 1e-9
        else:
            center = np.array([x0, y0])
            reach = r
        lo = np.floor((center - reach) / self.cell_size).astype(np.int64)
        hi = np.floor((center + reach) / self.cell_size).astype(np.int64)
        span = hi - lo + 1
        if np.prod(span.astype(float)) > max(len(self._buckets), 1):
            return self._all
        ranges = [range(a, b + 1) for a, b in zip(lo.tolist(), hi.tolist())]
        found = []
        if len(ranges) == 2:
            for i in ranges[0]:
                for j in ranges[1]:
                    b = self._buckets.get((i, j))
                    if b is not None:
                        found.append(b)
        else:
            for i in ranges[0]:
                for j in ranges[1]:
                    for k in ranges[2]:
                        b = self._buckets.get((i, j, k))
                        if b is not None:
                            found.append(b)
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(found)

    def query(self, center, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Positions (into the build arrays) and distances of points with d < r.

        Sorted by distance, ties by payload id.
        """
        if not r > 0:
            raise InvalidInputError("query radius must be positive")
        x0, y0 = float(center[0]), float(center[1])
        if len(self) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        cand = self._candidates(x0, y0, r)
        if cand.size == 0:
            return cand, np.empty(0)
        d = distances_from(x0, y0, self.xs[cand], self.ys[cand], self.model)
        keep = d < r
        cand, d = cand[keep], d[keep]
        order = np.lexsort((self.ids[cand], d))
        return cand[order], d[order]

    def radius_query(self, center, r: float) -> list[int]:
        pos, _ = self.query(center, r)
        return self.ids[pos].tolist()


def radius_query(idx: SpatialIndex, center, r: float) -> list[int]:
    """Payload ids strictly within ``r`` of ``center``, nearest first."""
    return idx.radius_query(center, r)

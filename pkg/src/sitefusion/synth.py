"""Seeded synthetic scenarios: planted sites with component layouts, clutter and FP hotspots.

Every detection lies on its detector's stride grid (one detection per grid
position, the highest score wins), matching the one-output-per-chip
structure of a scanned detection field.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field as dc_field, fields as dc_fields
from typing import NamedTuple

import numpy as np

from .classes import COMBO_LP, COMPONENT_CLASSES, EMPTY_LP, MISSILE, SITE, TEL, TEL_GROUP
from .exceptions import InvalidInputError
from .features import Candidate
from .field import DetectionField
from .geo import EARTH_RADIUS_M, HAVERSINE, PLANAR, DistanceModel, Point

EMPTY, MISSILE_PAD, TEL_PAD, TEL_GROUP_PAD = "empty", "missile", "tel", "tel_group"
OCCUPANCIES = (EMPTY, MISSILE_PAD, TEL_PAD, TEL_GROUP_PAD)

# which pad occupancies each component detector responds to
_RESPONDS = {
    EMPTY_LP: (EMPTY,),
    COMBO_LP: OCCUPANCIES,
    MISSILE: (MISSILE_PAD,),
    TEL: (TEL_PAD, TEL_GROUP_PAD),
    TEL_GROUP: (TEL_GROUP_PAD,),
}


@dataclass
class DetectorSpec:
    stride: float
    alpha: float
    hit_rate: float = 0.9
    footprint: float = 20.0
    jitter: float = 3.0
    miss_score: tuple = (0.3, 0.9)
    clutter_rate: float = 0.0
    clutter_score: tuple = (0.0, 1.0)
    hotspots: int = 0
    hotspot_radius: tuple = (40.0, 80.0)
    hotspot_rate: float = 0.3
    confuser_prob: float = 0.0

    def __post_init__(self):
        self.miss_score = tuple(self.miss_score)
        self.clutter_score = tuple(self.clutter_score)
        self.hotspot_radius = tuple(self.hotspot_radius)
        if not self.stride > 0:
            raise InvalidInputError("detector stride must be positive")
        for name in ("hit_rate", "hotspot_rate", "confuser_prob", "alpha"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if self.clutter_rate < 0 or self.hotspots < 0:
            raise InvalidInputError("clutter rate and hotspot count must be nonnegative")


def _default_detectors() -> dict:
    return {
        SITE: DetectorSpec(
            stride=75.0, alpha=0.9, hit_rate=0.7, footprint=160.0, jitter=10.0, miss_score=(0.5, 0.9),
            clutter_rate=0.005, clutter_score=(0.9, 1.0), hotspots=150, hotspot_radius=(90.0, 230.0), hotspot_rate=0.6,
        ),
        EMPTY_LP: DetectorSpec(stride=16.0, alpha=0.99, footprint=20.0, clutter_rate=1.0, confuser_prob=0.15),
        COMBO_LP: DetectorSpec(stride=16.0, alpha=0.99, footprint=20.0, clutter_rate=1.0, confuser_prob=0.15),
        MISSILE: DetectorSpec(stride=8.0, alpha=0.99, footprint=10.0, clutter_rate=1.0, confuser_prob=0.15),
        TEL: DetectorSpec(stride=8.0, alpha=0.99, footprint=10.0, clutter_rate=1.0, confuser_prob=0.15),
        TEL_GROUP: DetectorSpec(stride=16.0, alpha=0.99, footprint=20.0, clutter_rate=1.0, confuser_prob=0.15),
    }


@dataclass
class Scenario:
    """Scenario specification (planar meters; AOI given in km).

    ``occupancy`` holds the probabilities of empty / missile / TEL /
    TEL-group pads. ``origin`` (lon, lat), when set, projects the planar
    scene onto the sphere around that point.
    """

    seed: int = 0
    aoi_km: tuple = (200.0, 200.0)
    n_sites: int = 16
    pad_count: tuple = (4, 6)
    pad_ring_radius: float = 60.0
    occupancy: tuple = (0.35, 0.25, 0.2, 0.2)
    min_separation: float = 2000.0
    detectors: dict = dc_field(default_factory=_default_detectors)
    origin: tuple | None = None

    def __post_init__(self):
        self.aoi_km = tuple(float(v) for v in self.aoi_km)
        self.pad_count = tuple(int(v) for v in self.pad_count)
        self.occupancy = tuple(float(v) for v in self.occupancy)
        self.detectors = {k: v if isinstance(v, DetectorSpec) else DetectorSpec(**v) for k, v in self.detectors.items()}
        if self.origin is not None:
            self.origin = tuple(float(v) for v in self.origin)
        if len(self.occupancy) != 4 or abs(sum(self.occupancy) - 1.0) > 1e-9:
            raise InvalidInputError("occupancy must be four probabilities summing to 1")
        if self.pad_count[0] < 1 or self.pad_count[1] < self.pad_count[0]:
            raise InvalidInputError("pad_count must be a (min, max) pair with 1 <= min <= max")

    @property
    def width(self) -> float:
        return self.aoi_km[0] * 1000.0

    @property
    def height(self) -> float:
        return self.aoi_km[1] * 1000.0

    @property
    def area_km2(self) -> float:
        return self.aoi_km[0] * self.aoi_km[1]

    @property
    def model(self) -> DistanceModel:
        return DistanceModel(HAVERSINE if self.origin is not None else PLANAR)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detectors"] = {k: asdict(v) for k, v in sorted(self.detectors.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {f.name for f in dc_fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidInputError(f"unknown scenario keys: {unknown}")
        d = dict(d)
        if "detectors" in d:
            base = {k: asdict(v) for k, v in _default_detectors().items()}
            for k, spec in d["detectors"].items():
                extra = sorted(set(spec) - {f.name for f in dc_fields(DetectorSpec)})
                if extra:
                    raise InvalidInputError(f"unknown detector keys for {k}: {extra}")
                base.setdefault(k, {}).update(spec)
            d["detectors"] = base
        return cls(**d)


@dataclass
class SiteTruth:
    id: int
    center: Point
    pads: list  # (Point, occupancy)
    label: bool = True


class Hotspot(NamedTuple):
    id: int
    center: Point
    radius: float


class SyntheticData(NamedTuple):
    fields: dict
    sites: list
    hotspots: list


def _rngs(seed: int):
    layout, site_det, comp_det = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(layout), np.random.default_rng(site_det), np.random.default_rng(comp_det)


def _sample_separated(rng, n, s: Scenario, existing, margin=1000.0, max_tries=100_000):
    pts = list(existing)
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > max_tries:
            raise InvalidInputError("could not place objects with the requested separation; AOI too small")
        p = np.array([rng.uniform(margin, s.width - margin), rng.uniform(margin, s.height - margin)])
        if all(np.hypot(*(p - q)) >= s.min_separation for q in pts):
            pts.append(p)
            out.append(Point(float(p[0]), float(p[1])))
    return out


def layout_sites(s: Scenario) -> tuple[list, list]:
    """True sites (with pads) and site-detector FP hotspots, in planar meters."""
    if s.width <= 0 or s.height <= 0:
        raise InvalidInputError("AOI must have positive area")
    rng, _, _ = _rngs(s.seed)
    centers = _sample_separated(rng, s.n_sites, s, [])
    sites = []
    for i, c in enumerate(centers):
        n = int(rng.integers(s.pad_count[0], s.pad_count[1] + 1))
        phase = rng.uniform(0, 2 * math.pi)
        pads = []
        for k in range(n):
            a = phase + 2 * math.pi * k / n
            occ = OCCUPANCIES[int(rng.choice(4, p=s.occupancy))]
            pads.append((Point(c.x + s.pad_ring_radius * math.cos(a), c.y + s.pad_ring_radius * math.sin(a)), occ))
        sites.append(SiteTruth(i, c, pads, True))
    spec = s.detectors.get(SITE)
    n_hot = spec.hotspots if spec else 0
    hot_centers = _sample_separated(rng, n_hot, s, [np.array(c) for c in centers])
    lo, hi = spec.hotspot_radius if spec else (0.0, 0.0)
    hotspots = [Hotspot(i, c, float(rng.uniform(lo, hi))) for i, c in enumerate(hot_centers)]
    return sites, hotspots


class _GridAccumulator:
    """Max-score detection per stride-grid position."""

    def __init__(self, stride):
        self.stride = stride
        self.best: dict = {}

    def add(self, ij, score):
        key = (int(ij[0]), int(ij[1]))
        if score > self.best.get(key, -1.0):
            self.best[key] = float(score)

    def add_disc(self, rng, center, radius, p_hit, hit_range, miss_range, always_one=True):
        st = self.stride
        i0, i1 = math.floor((center[0] - radius) / st), math.ceil((center[0] + radius) / st)
        j0, j1 = math.floor((center[1] - radius) / st), math.ceil((center[1] + radius) / st)
        cells = [(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1) if math.hypot(i * st - center[0], j * st - center[1]) < radius]
        if not cells and always_one:
            cells = [(round(center[0] / st), round(center[1] / st))]
        for ij in cells:
            if p_hit is None:
                self.add(ij, rng.uniform(*hit_range))
            elif rng.random() < p_hit:
                self.add(ij, rng.uniform(*hit_range))
            elif miss_range is not None:
                self.add(ij, rng.uniform(*miss_range))

    def add_points(self, rng, xs, ys, score_range):
        scores = rng.uniform(score_range[0], score_range[1], size=len(xs))
        for x, y, sc in zip(xs, ys, scores):
            self.add((round(x / self.stride), round(y / self.stride)), sc)


def _poisson_points(rng, rate_km2, s: Scenario):
    n = int(rng.poisson(rate_km2 * s.area_km2))
    return rng.uniform(0, s.width, size=n), rng.uniform(0, s.height, size=n)


def _objects(cls, sites):
    if cls == SITE:
        return [site.center for site in sites]
    return [p for site in sites for p, occ in site.pads if occ in _RESPONDS[cls]]


def generate(s: Scenario) -> SyntheticData:
    """Detection fields per class plus the site and hotspot truth.

    Detection ids are unique across all classes and assigned in a fixed
    order, so the same scenario always produces identical output.
    """
    sites, hotspots = layout_sites(s)
    _, rng_site, rng_comp = _rngs(s.seed)
    fields = {}
    next_id = 0
    for cls in (SITE,) + COMPONENT_CLASSES:
        spec = s.detectors.get(cls)
        if spec is None:
            continue
        rng = rng_site if cls == SITE else rng_comp
        acc = _GridAccumulator(spec.stride)
        hit = (spec.alpha, 1.0)
        for obj in _objects(cls, sites):
            c = (obj.x + rng.normal(0, spec.jitter), obj.y + rng.normal(0, spec.jitter))
            acc.add_disc(rng, c, spec.footprint, spec.hit_rate, hit, spec.miss_score)
        if cls == SITE:
            for h in hotspots:
                acc.add_disc(rng, h.center, h.radius, spec.hotspot_rate, hit, spec.miss_score)
        else:
            for h in hotspots:
                if rng.random() < spec.confuser_prob:
                    r = float(rng.uniform(*spec.hotspot_radius))
                    a = rng.uniform(0, 2 * math.pi)
                    off = rng.uniform(0, 100.0)
                    c = (h.center.x + off * math.cos(a), h.center.y + off * math.sin(a))
                    acc.add_disc(rng, c, r, spec.hotspot_rate, hit, spec.miss_score)
        if spec.clutter_rate > 0:
            xs, ys = _poisson_points(rng, spec.clutter_rate, s)
            acc.add_points(rng, xs, ys, spec.clutter_score)
        keys = sorted(acc.best)
        ij = np.array(keys, dtype=float).reshape(-1, 2)
        x = ij[:, 0] * spec.stride
        y = ij[:, 1] * spec.stride
        scores = np.array([acc.best[k] for k in keys])
        ids = np.arange(next_id, next_id + len(keys))
        next_id += len(keys)
        if s.origin is not None:
            x, y = to_lonlat(x, y, s.origin)
        fields[cls] = DetectionField(cls, spec.stride, s.model, ids, x, y, scores)
    if s.origin is not None:
        sites = [_site_lonlat(site, s.origin) for site in sites]
        hotspots = [Hotspot(h.id, Point(*map(float, to_lonlat(h.center.x, h.center.y, s.origin))), h.radius) for h in hotspots]
    return SyntheticData(fields, sites, hotspots)


def to_lonlat(x, y, origin, radius=EARTH_RADIUS_M):
    """Local tangent-plane meters (east, north) to degrees around ``origin``."""
    lon0, lat0 = origin
    lat = lat0 + np.degrees(np.asarray(y, dtype=float) / radius)
    lon = lon0 + np.degrees(np.asarray(x, dtype=float) / (radius * math.cos(math.radians(lat0))))
    return lon, lat


def _site_lonlat(site: SiteTruth, origin) -> SiteTruth:
    def conv(p):
        lon, lat = to_lonlat(p.x, p.y, origin)
        return Point(float(lon), float(lat))

    return SiteTruth(site.id, conv(site.center), [(conv(p), o) for p, o in site.pads], site.label)


def make_training_set(s: Scenario, offset: float = 5000.0) -> list[Candidate]:
    """Pseudo-candidates: one positive per site center plus up to four negatives
    offset N/S/E/W, dropped when they fall outside the AOI."""
    sites, _ = layout_sites(s)
    out = []
    for site in sites:
        c = site.center
        out.append(Candidate(len(out), c, 0.0, True, "pseudo-train"))
        for dx, dy in ((0, offset), (0, -offset), (offset, 0), (-offset, 0)):
            x, y = c.x + dx, c.y + dy
            if 0.0 <= x <= s.width and 0.0 <= y <= s.height:
                out.append(Candidate(len(out), Point(x, y), 0.0, False, "pseudo-train"))
    if s.origin is not None:
        for c in out:
            lon, lat = to_lonlat(c.location.x, c.location.y, s.origin)
            c.location = Point(float(lon), float(lat))
    return out

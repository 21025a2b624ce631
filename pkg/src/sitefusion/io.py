"""CSV/JSON file formats.

Every CSV is paired with a ``<name>.meta.json`` sidecar carrying the
format version and any metadata (field strides, distance model, config
echo). Floats are written with ``repr`` so output is byte-stable.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cluster import Cluster
from .config import FORMAT_VERSION
from .dta import DtaThreshold, SweepRow
from .exceptions import ParseError
from .features import Candidate, CandidateFeatures, ComponentValues
from .field import DetectionField
from .geo import DistanceModel, Point
from .rank import RankedCandidate

FIELD_HEADER = ["id", "class", "x", "y", "score", "tile"]
CLUSTER_HEADER = ["rank", "class", "score", "x", "y", "seed_id", "member_count"]
CANDIDATE_HEADER = ["candidate_id", "x", "y", "site_score", "label", "source"]
FEATURE_HEADER = ["candidate_id", "label", "class", "raw_max", "raw_count", "cluster_count", "cluster_score_sum"]
SWEEP_HEADER = ["threshold", "tpr", "ppv", "f1"]
DECISION_HEADER = ["candidate_id", "decision", "score", "model", "combo", "feature_type"]
RANKED_HEADER = ["rank", "candidate_id", "fused_score", "is_tp"]
TRUTH_HEADER = ["site_id", "x", "y", "label", "kind"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def meta_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".meta.json")


def dump_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    except OSError as exc:
        raise ParseError(path, 0, exc.strerror or str(exc)) from None


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    dump_json({"format_version": FORMAT_VERSION, "header": list(header), **(meta or {})}, meta_path(path))


def read_csv(path, header: Sequence[str], required: Sequence[str] | None = None):
    """Yield ``(line_number, row_dict)``; header must contain ``required`` columns."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ParseError(path, 0, exc.strerror or str(exc)) from None
    with fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file") from None
        need = list(required if required is not None else header)
        missing = [c for c in need if c not in got]
        if missing:
            raise ParseError(path, 1, f"missing column(s) {missing}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(got):
                raise ParseError(path, lineno, f"expected {len(got)} fields, got {len(row)}")
            yield lineno, dict(zip(got, row))


def _num(path, lineno, row, key, kind=float, optional=False):
    v = row.get(key, "")
    if v == "" and optional:
        return None
    try:
        return kind(v)
    except ValueError:
        raise ParseError(path, lineno, f"bad {key} value {v!r}") from None


def _bool(path, lineno, row, key):
    v = row.get(key, "").strip().lower()
    if v == "":
        return None
    if v in ("1", "true", "yes"):
        return True
    if v in ("0", "false", "no"):
        return False
    raise ParseError(path, lineno, f"bad {key} value {v!r}")


# detection fields

def write_fields(path, fields: dict, extra_meta: dict | None = None) -> None:
    rows = []
    for cls in sorted(fields):
        f = fields[cls]
        rows.extend(zip(f.ids.tolist(), [cls] * len(f), f.x.tolist(), f.y.tolist(), f.scores.tolist(), f.tiles))
    models = {f.model for f in fields.values()}
    model = models.pop() if len(models) == 1 else DistanceModel()
    meta = {
        "distance_model": model.to_dict(),
        "classes": {cls: {"stride": f.stride} for cls, f in sorted(fields.items())},
    }
    meta.update(extra_meta or {})
    write_csv(path, FIELD_HEADER, rows, meta)


def read_fields(path, meta: dict | None = None, default_strides: dict | None = None, model: DistanceModel | None = None) -> dict:
    """Fields keyed by class from a detection CSV and its metadata sidecar."""
    path = Path(path)
    if meta is None:
        mp = meta_path(path)
        meta = load_json(mp) if mp.exists() else {}
    if model is None:
        model = DistanceModel.from_dict(meta["distance_model"]) if "distance_model" in meta else DistanceModel()
    cols: dict = {}
    for lineno, row in read_csv(path, FIELD_HEADER, ["id", "class", "x", "y", "score"]):
        cls = row["class"]
        if not cls:
            raise ParseError(path, lineno, "empty class tag")
        score = _num(path, lineno, row, "score")
        if not 0.0 <= score <= 1.0:
            raise ParseError(path, lineno, f"score {score} outside [0, 1]")
        c = cols.setdefault(cls, ([], [], [], [], []))
        c[0].append(_num(path, lineno, row, "id", int))
        c[1].append(_num(path, lineno, row, "x"))
        c[2].append(_num(path, lineno, row, "y"))
        c[3].append(score)
        c[4].append(row.get("tile") or None)
    strides = {k: v["stride"] for k, v in meta.get("classes", {}).items()}
    out = {}
    for cls, (ids, xs, ys, ss, ts) in sorted(cols.items()):
        stride = strides.get(cls, (default_strides or {}).get(cls))
        if stride is None:
            raise ParseError(path, 0, f"no stride known for class {cls!r}")
        out[cls] = DetectionField(cls, float(stride), model, ids, xs, ys, ss, ts)
    return out


# clusters and candidates

def write_clusters(path, clusters: Sequence[Cluster], meta: dict | None = None) -> None:
    rows = [(c.rank, c.cls, c.score, c.location.x, c.location.y, c.seed_id, c.member_count) for c in clusters]
    write_csv(path, CLUSTER_HEADER, rows, meta)


def read_clusters(path) -> list[Cluster]:
    out = []
    for lineno, row in read_csv(path, CLUSTER_HEADER):
        out.append(
            Cluster(
                id=len(out),
                cls=row["class"],
                seed_id=_num(path, lineno, row, "seed_id", int),
                location=Point(_num(path, lineno, row, "x"), _num(path, lineno, row, "y")),
                members=[],
                raw_weighted_sum=float("nan"),
                score=_num(path, lineno, row, "score"),
                rank=_num(path, lineno, row, "rank", int),
                n_members=_num(path, lineno, row, "member_count", int),
            )
        )
    return out


def write_candidates(path, candidates: Sequence[Candidate], meta: dict | None = None) -> None:
    rows = [(c.id, c.location.x, c.location.y, c.site_score, c.label, c.source) for c in candidates]
    write_csv(path, CANDIDATE_HEADER, rows, meta)


def read_candidates(path) -> list[Candidate]:
    out = []
    for lineno, row in read_csv(path, CANDIDATE_HEADER, ["candidate_id", "x", "y"]):
        out.append(
            Candidate(
                _num(path, lineno, row, "candidate_id", int),
                Point(_num(path, lineno, row, "x"), _num(path, lineno, row, "y")),
                _num(path, lineno, row, "site_score", optional=True) or 0.0,
                _bool(path, lineno, row, "label"),
                row.get("source") or "scan",
            )
        )
    return out


def write_truth(path, sites, hotspots=(), meta: dict | None = None) -> None:
    rows = [(s.id, s.center.x, s.center.y, True, "site") for s in sites]
    rows += [(h.id, h.center.x, h.center.y, False, "hotspot") for h in hotspots]
    write_csv(path, TRUTH_HEADER, rows, meta)


def read_truth_sites(path) -> list[Point]:
    return [
        Point(_num(path, n, r, "x"), _num(path, n, r, "y"))
        for n, r in read_csv(path, TRUTH_HEADER, ["x", "y", "label"])
        if _bool(path, n, r, "label")
    ]


# features

def write_features(path, features: Sequence[CandidateFeatures], meta: dict | None = None) -> None:
    rows = []
    for f in features:
        for cls in sorted(f.values):
            v = f.values[cls]
            rows.append((f.candidate_id, f.label, cls, v.raw_max, v.raw_count, v.cluster_count, v.cluster_score_sum))
    write_csv(path, FEATURE_HEADER, rows, meta)


def read_features(path) -> list[CandidateFeatures]:
    by_id: dict = {}
    for lineno, row in read_csv(path, FEATURE_HEADER):
        cid = _num(path, lineno, row, "candidate_id", int)
        f = by_id.setdefault(cid, CandidateFeatures(cid, label=_bool(path, lineno, row, "label")))
        f.values[row["class"]] = ComponentValues(
            _num(path, lineno, row, "raw_max"),
            _num(path, lineno, row, "raw_count", int),
            _num(path, lineno, row, "cluster_count", int),
            _num(path, lineno, row, "cluster_score_sum"),
        )
    return list(by_id.values())


# thresholds, sweeps, decisions, rankings

def write_thresholds(path, thresholds: Sequence[DtaThreshold], meta: dict | None = None) -> None:
    dump_json({"format_version": FORMAT_VERSION, "thresholds": [t.to_dict() for t in thresholds], **(meta or {})}, path)


def read_thresholds(path) -> list[DtaThreshold]:
    d = load_json(path)
    try:
        return [DtaThreshold.from_dict(t) for t in d["thresholds"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(path, 0, f"malformed thresholds file: {exc}") from None


def write_sweep(path, rows: Sequence[SweepRow], meta: dict | None = None) -> None:
    write_csv(path, SWEEP_HEADER, rows, meta)


def write_decisions(path, records, meta: dict | None = None) -> None:
    write_csv(path, DECISION_HEADER, records, meta)


def read_decisions(path) -> dict:
    return {
        _num(path, n, r, "candidate_id", int): bool(_bool(path, n, r, "decision"))
        for n, r in read_csv(path, DECISION_HEADER, ["candidate_id", "decision"])
    }


def write_ranked(path, ranked, meta: dict | None = None) -> None:
    write_csv(path, RANKED_HEADER, ranked, meta)


def read_ranked(path) -> list[RankedCandidate]:
    return [
        RankedCandidate(_num(path, n, r, "rank", int), _num(path, n, r, "candidate_id", int), _num(path, n, r, "fused_score"), _bool(path, n, r, "is_tp"))
        for n, r in read_csv(path, RANKED_HEADER)
    ]

"""Composition of the stages into the error-reduction and re-ranking workflows."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .classes import COMPONENT_CLASSES, SITE
from .cluster import Cluster, ClusterParams, cluster_detections
from .features import Candidate, CandidateFeatures, CandidateScanner
from .field import DetectionField
from .fusion import fit_fusion, fuse_candidates, make_model
from .geo import DistanceModel, distances_from
from .metrics import confusion
from .rank import WeightProfile, avg_tp_rank, fused_score_from_features, rerank
from .synth import Scenario, generate, make_training_set


def site_params(cfg: dict, stride: float | None = None) -> ClusterParams:
    s = cfg["site"]
    return ClusterParams(s["R"], stride or s["stride"], s["alpha"], cfg["cluster"]["penalty"], cfg["cluster"]["membership_radius"])


def component_params(cfg: dict, fields: Mapping[str, DetectionField] | None = None) -> dict:
    c = cfg["components"]
    out = {}
    for cls in COMPONENT_CLASSES:
        stride = fields[cls].stride if fields and cls in fields else c["strides"][cls]
        out[cls] = ClusterParams(c["R"], stride, c["alpha"], cfg["cluster"]["penalty"], cfg["cluster"]["membership_radius"])
    return out


def candidates_from_clusters(clusters: Sequence[Cluster]) -> list[Candidate]:
    """One scan candidate per site cluster; candidate id is the cluster rank."""
    return [Candidate(c.rank, c.location, c.score, None, "scan") for c in clusters]


def label_candidates(candidates: Sequence[Candidate], site_centers: Sequence, match_radius: float, model: DistanceModel | None = None) -> list:
    """Label in place; each true site claims its best-scored candidate within ``match_radius``.

    Returns the indices of sites no candidate matched.
    """
    model = model or DistanceModel()
    for c in candidates:
        c.label = False
    if not candidates:
        return list(range(len(site_centers)))
    xs = np.array([c.location[0] for c in candidates])
    ys = np.array([c.location[1] for c in candidates])
    missed = []
    for k, s in enumerate(site_centers):
        d = distances_from(s[0], s[1], xs, ys, model)
        near = [i for i in np.nonzero(d < match_radius)[0] if not candidates[i].label]
        if not near:
            missed.append(k)
            continue
        best = min(near, key=lambda i: (-candidates[i].site_score, candidates[i].id))
        candidates[best].label = True
    return missed


def truth_map(candidates: Sequence[Candidate], n_missed: int = 0) -> dict:
    """Candidate labels keyed by id; missed sites enter as negative ids labeled true."""
    truth = {c.id: bool(c.label) for c in candidates}
    for k in range(n_missed):
        truth[-1 - k] = True
    return truth


def scan_features(candidates, fields, cfg) -> list[CandidateFeatures]:
    comp = {k: f for k, f in fields.items() if k in COMPONENT_CLASSES}
    scanner = CandidateScanner(comp, component_params(cfg, comp), cfg["features"]["radius"], cfg["features"]["box"])
    return scanner.features(candidates)


def fusion_model(cfg: dict, kind: str | None = None, seed: int | None = None):
    kind = kind or cfg["fusion"]["model"]
    seed = cfg["seed"] if seed is None else seed
    if kind == "mlp":
        p = dict(cfg["fusion"]["mlp"])
        p["hidden_layer_sizes"] = tuple(p["hidden_layer_sizes"])
        return make_model("mlp", random_state=seed, **p)
    if kind == "anfis":
        return make_model("anfis", random_state=seed, **cfg["fusion"]["anfis"])
    return make_model(kind)


def weight_profile(spec) -> WeightProfile:
    if isinstance(spec, WeightProfile):
        return spec
    if spec == "expert":
        return WeightProfile.expert()
    if spec == "uniform":
        return WeightProfile.uniform()
    if isinstance(spec, Mapping):
        return WeightProfile(spec)
    raise ValueError(f"unknown weight profile {spec!r}")


def run_experiment(cfg: dict, scenario: Scenario | None = None, train_scenario: Scenario | None = None) -> dict:
    """End-to-end synthetic experiment: baseline, fusion and re-ranking.

    Returns a report dict holding metrics and the per-stage outputs.
    """
    seed = cfg["seed"]
    if scenario is None:
        scenario = Scenario.from_dict({**cfg["synth"]["scenario"], "seed": seed})
    if train_scenario is None:
        train_scenario = Scenario.from_dict(
            {**scenario.to_dict(), "seed": seed + cfg["synth"]["train_seed_offset"], "n_sites": cfg["synth"]["train_sites"]}
        )
    data = generate(scenario)
    model = scenario.model
    site_clusters = cluster_detections(data.fields[SITE], site_params(cfg, data.fields[SITE].stride))
    candidates = candidates_from_clusters(site_clusters)
    missed = label_candidates(candidates, [s.center for s in data.sites], cfg["features"]["match_radius"], model)
    truth = truth_map(candidates, len(missed))

    baseline = confusion({c.id: True for c in candidates}, truth)
    feats = scan_features(candidates, data.fields, cfg)

    train_data = generate(train_scenario)
    train_cands = make_training_set(train_scenario)
    train_feats = scan_features(train_cands, train_data.fields, cfg)

    combo, ftype = cfg["fusion"]["combo"], cfg["fusion"]["feature_type"]
    est = fit_fusion(fusion_model(cfg), train_feats, combo, ftype)
    result = fuse_candidates(feats, est, combo, ftype)
    decisions = {r.candidate_id: r.decision for r in result.records}
    fused = confusion(decisions, truth)

    area = scenario.area_km2
    by_id = {f.candidate_id: f for f in feats}
    base_rank = rerank(candidates, [c.site_score for c in candidates])
    weights = weight_profile(cfg["rank"]["weights"])
    fused_rank = rerank(candidates, [fused_score_from_features(c, by_id[c.id], weights) for c in candidates])
    return {
        "config": cfg,
        "scenario": scenario.to_dict(),
        "n_candidates": len(candidates),
        "missed_sites": len(missed),
        "baseline": baseline.to_dict(area),
        "fusion": fused.to_dict(area, baseline),
        "rank": {
            "baseline_avg_tp_rank": avg_tp_rank(base_rank),
            "fused_avg_tp_rank": avg_tp_rank(fused_rank),
            "weights": weights.to_dict(),
        },
        "_objects": {
            "candidates": candidates,
            "features": feats,
            "train_features": train_feats,
            "model": est,
            "decisions": result.records,
            "baseline_ranking": base_rank,
            "fused_ranking": fused_rank,
            "data": data,
        },
    }

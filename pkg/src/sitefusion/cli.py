"""Command-line driver: ``sitefusion <command> [options]``.

Each command reads and writes only the documented CSV/JSON formats. On
failure a JSON error record goes to stderr and the exit status is
nonzero (2 for parse/config errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .classes import COMPONENT_CLASSES, SITE
from .cluster import cluster_detections, norm_constants
from .config import FORMAT_VERSION, load_config
from .dta import fit_threshold, sweep_curve
from .exceptions import ConfigError, ParseError
from .features import FEATURE_TYPES, INTEGER_FEATURES, feature_matrix
from .fusion import combo_classes, fit_fusion, fuse_candidates, model_from_dict
from .metrics import confusion, error_density, relative_error_reduction
from .pipeline import (
    candidates_from_clusters,
    component_params,
    fusion_model,
    label_candidates,
    scan_features,
    site_params,
    truth_map,
    weight_profile,
)
from .rank import avg_tp_rank, fused_score_from_features, rerank
from .synth import Scenario, generate, make_training_set


def _config(args) -> dict:
    override: dict = {}
    if getattr(args, "seed", None) is not None:
        override["seed"] = args.seed
    if getattr(args, "penalty", None):
        override.setdefault("cluster", {})["penalty"] = args.penalty
    for flag, key in (("model", "model"), ("combo", "combo"), ("feature_type", "feature_type")):
        if getattr(args, flag, None):
            override.setdefault("fusion", {})[key] = getattr(args, flag)
    if getattr(args, "weights", None):
        w = args.weights
        if w not in ("uniform", "expert"):
            w = io.load_json(w)
            w = w.get("weights", w)
        override.setdefault("rank", {})["weights"] = w
    return load_config(args.config, override)


def _meta(cfg: dict, **extra) -> dict:
    return {"config": cfg, **extra}


def cmd_synth(args) -> dict:
    cfg = _config(args)
    out = Path(args.output)
    scen = Scenario.from_dict({**cfg["synth"]["scenario"], "seed": cfg["seed"]})
    train = Scenario.from_dict({**scen.to_dict(), "seed": cfg["seed"] + cfg["synth"]["train_seed_offset"], "n_sites": cfg["synth"]["train_sites"]})
    for name, s in (("aoi", scen), ("train", train)):
        data = generate(s)
        meta = _meta(cfg, scenario=s.to_dict(), area_km2=s.area_km2)
        io.write_fields(out / name / "fields.csv", data.fields, meta)
        io.write_truth(out / name / "truth.csv", data.sites, data.hotspots, meta)
        io.dump_json({"format_version": FORMAT_VERSION, **s.to_dict()}, out / name / "scenario.json")
    io.write_candidates(out / "train" / "candidates.csv", make_training_set(train), _meta(cfg, scenario=train.to_dict()))
    return {"output": str(out)}


def _cluster_params(cfg, cls, field):
    if cls == SITE:
        return site_params(cfg, field.stride)
    return component_params(cfg, {cls: field})[cls]


def cmd_cluster(args) -> dict:
    cfg = _config(args)
    fields = io.read_fields(args.input, default_strides={SITE: cfg["site"]["stride"], **cfg["components"]["strides"]})
    cls = args.cls or SITE
    if cls not in fields:
        raise ParseError(args.input, 0, f"no detections of class {cls!r}")
    params = _cluster_params(cfg, cls, fields[cls])
    clusters = cluster_detections(fields[cls], params)
    meta = _meta(
        cfg,
        cls=cls,
        params=params.to_dict(),
        norm=norm_constants(params.R, params.stride)._asdict(),
        distance_model=fields[cls].model.to_dict(),
        stage_defaults={
            "site_alpha": cfg["site"]["alpha"],
            "site_R": cfg["site"]["R"],
            "component_alpha": cfg["components"]["alpha"],
            "component_R": cfg["components"]["R"],
            "feature_radius": cfg["features"]["radius"],
        },
    )
    io.write_clusters(args.output, clusters, meta)
    return {"clusters": len(clusters)}


def cmd_candidates(args) -> dict:
    cfg = _config(args)
    cands = candidates_from_clusters(io.read_clusters(args.input))
    missed = None
    if args.truth:
        missed = label_candidates(cands, io.read_truth_sites(args.truth), cfg["features"]["match_radius"])
    io.write_candidates(args.output, cands, _meta(cfg, missed_sites=None if missed is None else len(missed)))
    return {"candidates": len(cands), "missed_sites": None if missed is None else len(missed)}


def cmd_features(args) -> dict:
    cfg = _config(args)
    fields = io.read_fields(args.input, default_strides={SITE: cfg["site"]["stride"], **cfg["components"]["strides"]})
    cands = io.read_candidates(args.candidates)
    feats = scan_features(cands, fields, cfg)
    io.write_features(args.output, feats, _meta(cfg))
    return {"candidates": len(feats)}


def cmd_dta(args) -> dict:
    cfg = _config(args)
    ftype = cfg["fusion"]["feature_type"]
    feats = io.read_features(args.input)
    classes = [args.cls] if args.cls else sorted({k for f in feats for k in f.values})
    results = []
    for cls in classes:
        X, y, _ = feature_matrix(feats, [cls], ftype)
        if y is None:
            raise ParseError(args.input, 0, "DTA needs labeled candidates")
        results.append(fit_threshold(X[:, 0], y, integer=ftype in INTEGER_FEATURES or None, cls=cls, feature_type=ftype))
    io.write_thresholds(args.output, results, _meta(cfg))
    return {"thresholds": {t.cls: t.threshold for t in results}}


def _thresholds_for(path, classes, ftype):
    if not path:
        return None
    table = {(t.cls, t.feature_type): t.threshold for t in io.read_thresholds(path)}
    try:
        return [table[(c, ftype)] for c in classes]
    except KeyError as exc:
        raise ParseError(path, 0, f"no threshold for {exc.args[0]}") from None


def cmd_fuse(args) -> dict:
    cfg = _config(args)
    fz = cfg["fusion"]
    combo, ftype = fz["combo"], fz["feature_type"]
    test = io.read_features(args.input)
    if args.load_model:
        d = io.load_json(args.load_model)
        est = model_from_dict(d["model"])
    else:
        if not args.train:
            raise ConfigError("fuse needs --train or --load-model", ["train"])
        train = io.read_features(args.train)
        est = fusion_model(cfg)
        t = _thresholds_for(args.thresholds, combo_classes(combo), ftype)
        if t is not None:
            est.set_params(thresholds=t)
        fit_fusion(est, train, combo, ftype)
    result = fuse_candidates(test, est, combo, ftype)
    meta = _meta(cfg)
    io.write_decisions(args.output, result.records, meta)
    if args.model_out:
        io.dump_json({"format_version": FORMAT_VERSION, "combo": combo, "feature_type": ftype, "seed": cfg["seed"], "model": est.to_dict()}, args.model_out)
    return {"kept": len(result.kept), "total": len(result.records)}


def cmd_rank(args) -> dict:
    cfg = _config(args)
    feats = {f.candidate_id: f for f in io.read_features(args.input)}
    cands = io.read_candidates(args.candidates)
    w = weight_profile(cfg["rank"]["weights"])
    missing = [c.id for c in cands if c.id not in feats]
    if missing:
        raise ParseError(args.input, 0, f"no features for candidate(s) {missing[:10]}")
    ranked = rerank(cands, [fused_score_from_features(c, feats[c.id], w) for c in cands])
    io.write_ranked(args.output, ranked, _meta(cfg, weights=w.to_dict()))
    return {"ranked": len(ranked)}


def cmd_eval(args) -> dict:
    cfg = _config(args)
    area = args.area or cfg["eval"]["area_km2"]
    head = Path(args.input).open().readline().strip().split(",")
    report = {"format_version": FORMAT_VERSION, "config": cfg, "input": Path(args.input).name}
    if head[:1] == ["rank"]:
        ranked = io.read_ranked(args.input)
        truth = None
        if args.candidates:
            truth = {c.id: bool(c.label) for c in io.read_candidates(args.candidates)}
        report["avg_tp_rank"] = avg_tp_rank(ranked, truth)
        report["n_ranked"] = len(ranked)
    else:
        if not args.candidates:
            raise ConfigError("eval of decisions needs --candidates with labels", ["candidates"])
        cands = io.read_candidates(args.candidates)
        mp = io.meta_path(args.candidates)
        missed = (io.load_json(mp).get("missed_sites") or 0) if mp.exists() else 0
        truth = truth_map(cands, missed)
        decisions = io.read_decisions(args.input)
        m = confusion(decisions, truth)
        base = confusion({c.id: True for c in cands}, truth)
        report["metrics"] = m.to_dict(area)
        report["baseline"] = base.to_dict(area)
        report["relative_error_reduction"] = relative_error_reduction(m, base) if base.errors else None
        report["error_density"] = error_density(m, area)
    io.dump_json(report, args.output)
    return {k: v for k, v in report.items() if k not in ("config",)}


def cmd_sweep_plot(args) -> dict:
    cfg = _config(args)
    ftype = cfg["fusion"]["feature_type"]
    cls = args.cls or COMPONENT_CLASSES[3]
    feats = io.read_features(args.input)
    X, y, _ = feature_matrix(feats, [cls], ftype)
    if y is None:
        raise ParseError(args.input, 0, "sweep needs labeled candidates")
    integer = ftype in INTEGER_FEATURES or None
    rows = sweep_curve(X[:, 0], y, integer)
    best = fit_threshold(X[:, 0], y, integer)
    out = Path(args.output)
    io.write_sweep(out, rows, _meta(cfg, cls=cls, feature_type=ftype, best=best.to_dict()))
    svg = out.with_suffix(".svg")
    _plot_sweep(rows, best, cls, ftype, svg)
    return {"curve": str(out), "plot": str(svg), "threshold": best.threshold}


def _plot_sweep(rows, best, cls, ftype, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "sitefusion"
    t = [r.threshold for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, [r.tpr for r in rows], marker="o", label="TPR")
    ax.plot(t, [r.ppv for r in rows], marker="s", label="PPV")
    ax.plot(t, [r.f1 for r in rows], marker="^", label="F1")
    ax.axvline(best.threshold, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel(f"{cls} {ftype} threshold")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def cmd_pipeline(args) -> dict:
    """synth -> cluster -> candidates -> features -> dta -> fuse -> rank -> eval under one directory."""
    out = Path(args.output)
    common = {"config": args.config, "seed": args.seed, "penalty": args.penalty, "model": args.model, "combo": args.combo,
              "feature_type": args.feature_type, "weights": args.weights}

    def ns(**kw):
        return argparse.Namespace(**{**common, "cls": None, "truth": None, "candidates": None, "train": None,
                                     "thresholds": None, "model_out": None, "load_model": None, "area": None, **kw})

    cmd_synth(ns(output=out))
    for part in ("aoi", "train"):
        d = out / part
        if part == "aoi":
            cmd_cluster(ns(input=d / "fields.csv", cls=SITE, output=d / "site_clusters.csv"))
            cmd_candidates(ns(input=d / "site_clusters.csv", truth=d / "truth.csv", output=d / "candidates.csv"))
        cmd_features(ns(input=d / "fields.csv", candidates=d / "candidates.csv", output=d / "features.csv"))
    cmd_dta(ns(input=out / "train" / "features.csv", output=out / "thresholds.json"))
    cmd_fuse(ns(input=out / "aoi" / "features.csv", train=out / "train" / "features.csv", output=out / "decisions.csv",
                model_out=out / "model.json"))
    cmd_rank(ns(input=out / "aoi" / "features.csv", candidates=out / "aoi" / "candidates.csv", output=out / "ranked.csv"))
    cfg = _config(ns())
    area = Scenario.from_dict({**cfg["synth"]["scenario"], "seed": cfg["seed"]}).area_km2
    fused = cmd_eval(ns(input=out / "decisions.csv", candidates=out / "aoi" / "candidates.csv", output=out / "report.json", area=area))
    ranking = cmd_eval(ns(input=out / "ranked.csv", candidates=out / "aoi" / "candidates.csv", output=out / "rank_report.json"))
    base_rank = rerank(io.read_candidates(out / "aoi" / "candidates.csv"), [c.site_score for c in io.read_candidates(out / "aoi" / "candidates.csv")])
    return {
        "metrics": fused["metrics"],
        "relative_error_reduction": fused["relative_error_reduction"],
        "avg_tp_rank": ranking["avg_tp_rank"],
        "baseline_avg_tp_rank": avg_tp_rank(base_rank),
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sitefusion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, *flags):
        sp = sub.add_parser(name, help=func.__doc__.splitlines()[0] if func.__doc__ else None)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output", required=True)
        for f in flags:
            f(sp)
        sp.set_defaults(func=func)
        return sp

    inp = lambda sp: sp.add_argument("--input", required=True)  # noqa: E731
    cls = lambda sp: sp.add_argument("--class", dest="cls", choices=(SITE,) + COMPONENT_CLASSES)  # noqa: E731
    ft = lambda sp: sp.add_argument("--feature-type", dest="feature_type", choices=FEATURE_TYPES)  # noqa: E731
    combo = lambda sp: sp.add_argument("--combo", choices=("empty+3", "combo+3", "all5"))  # noqa: E731
    model = lambda sp: sp.add_argument("--model", choices=("or", "mlp", "anfis"))  # noqa: E731
    pen = lambda sp: sp.add_argument("--penalty", choices=("truncate", "flat", "exp"))  # noqa: E731
    wts = lambda sp: sp.add_argument("--weights", help="uniform, expert, or a JSON file of class weights")  # noqa: E731
    cands = lambda sp: sp.add_argument("--candidates")  # noqa: E731

    add("synth", cmd_synth)
    add("cluster", cmd_cluster, inp, cls, pen)
    add("candidates", cmd_candidates, inp, lambda sp: sp.add_argument("--truth"))
    add("features", cmd_features, inp, lambda sp: sp.add_argument("--candidates", required=True), pen)
    add("dta", cmd_dta, inp, cls, ft)
    add(
        "fuse", cmd_fuse, inp, ft, combo, model,
        lambda sp: sp.add_argument("--train"),
        lambda sp: sp.add_argument("--thresholds"),
        lambda sp: sp.add_argument("--model-out", dest="model_out"),
        lambda sp: sp.add_argument("--load-model", dest="load_model"),
    )
    add("rank", cmd_rank, inp, wts, lambda sp: sp.add_argument("--candidates", required=True))
    add("eval", cmd_eval, inp, cands, lambda sp: sp.add_argument("--area", type=float))
    add("sweep-plot", cmd_sweep_plot, inp, cls, ft)
    add("pipeline", cmd_pipeline, pen, model, combo, ft, wts)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary = args.func(args)
    except ParseError as exc:
        _error("parse-error", str(exc), file=exc.path, line=exc.line)
        return 2
    except ConfigError as exc:
        _error("config-error", str(exc), keys=exc.keys)
        return 2
    except (ValueError, OSError) as exc:
        _error(type(exc).__name__, str(exc))
        return 1
    print(json.dumps(summary, sort_keys=True, default=str))
    return 0


def _error(kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

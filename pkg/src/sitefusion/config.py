"""Run configuration: defaults, merging and schema validation."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .classes import COMBO_LP, COMPONENT_CLASSES, EMPTY_LP, MISSILE, TEL, TEL_GROUP
from .exceptions import ConfigError

FORMAT_VERSION = 1

DEFAULTS = {
    "format_version": FORMAT_VERSION,
    "seed": 0,
    "geo": {"distance_model": "planar", "sphere_radius": 6371008.8},
    "site": {"alpha": 0.9, "R": 300.0, "stride": 75.0},
    "components": {
        "alpha": 0.99,
        "R": 32.0,
        "strides": {EMPTY_LP: 16.0, COMBO_LP: 16.0, MISSILE: 8.0, TEL: 8.0, TEL_GROUP: 16.0},
    },
    "cluster": {"penalty": "truncate", "membership_radius": None},
    "features": {"radius": 150.0, "box": 640.0, "match_radius": 300.0},
    "fusion": {
        "model": "mlp",
        "combo": "all5",
        "feature_type": "cluster-count",
        "mlp": {
            "hidden_layer_sizes": [100, 100],
            "activation": "tanh",
            "learning_rate": 1e-3,
            "epochs": 200,
            "batch_size": 32,
            "l2": 0.0,
            "normalize": False,
            "decision_threshold": 0.5,
        },
        "anfis": {"max_iter": 20000, "tol": 1e-12, "normalize": True},
    },
    "rank": {"weights": "expert"},
    "eval": {"area_km2": 40000.0},
    "synth": {"scenario": {}, "train_seed_offset": 1, "train_sites": 64},
}

# sections whose keys are free-form (validated elsewhere)
_OPEN = {("components", "strides"), ("synth", "scenario")}


def _merge(base: dict, override: dict, path: tuple, bad: list) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        here = path + (k,)
        if k not in base:
            bad.append(".".join(here))
            continue
        if isinstance(base[k], dict) and here not in _OPEN:
            if not isinstance(v, dict):
                bad.append(".".join(here))
                continue
            out[k] = _merge(base[k], v, here, bad)
        elif here in _OPEN:
            if not isinstance(v, dict):
                bad.append(".".join(here))
                continue
            merged = dict(base[k])
            merged.update(v)
            out[k] = merged
        else:
            out[k] = copy.deepcopy(v)
    return out


def _check_values(cfg: dict, bad: list) -> None:
    def positive(path, v):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            bad.append(path)

    def unit(path, v):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0 <= v <= 1:
            bad.append(path)

    positive("site.R", cfg["site"]["R"])
    positive("site.stride", cfg["site"]["stride"])
    unit("site.alpha", cfg["site"]["alpha"])
    positive("components.R", cfg["components"]["R"])
    unit("components.alpha", cfg["components"]["alpha"])
    for k, v in cfg["components"]["strides"].items():
        if k not in COMPONENT_CLASSES:
            bad.append(f"components.strides.{k}")
        else:
            positive(f"components.strides.{k}", v)
    positive("features.radius", cfg["features"]["radius"])
    positive("features.box", cfg["features"]["box"])
    positive("features.match_radius", cfg["features"]["match_radius"])
    positive("eval.area_km2", cfg["eval"]["area_km2"])
    if cfg["geo"]["distance_model"] not in ("planar", "haversine"):
        bad.append("geo.distance_model")
    if cfg["cluster"]["penalty"] not in ("truncate", "flat", "exp", "exp-decay"):
        bad.append("cluster.penalty")
    if cfg["fusion"]["model"] not in ("or", "mlp", "anfis"):
        bad.append("fusion.model")
    if cfg["fusion"]["combo"] not in ("empty+3", "combo+3", "all5"):
        bad.append("fusion.combo")
    if cfg["fusion"]["feature_type"] not in ("raw-max", "raw-count", "cluster-count", "cluster-score-sum"):
        bad.append("fusion.feature_type")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        bad.append("seed")


def build_config(override: dict | None = None) -> dict:
    """Defaults deep-merged with ``override``; raises :class:`ConfigError`
    listing every unknown or invalid key."""
    bad: list = []
    cfg = _merge(DEFAULTS, override or {}, (), bad)
    _check_values(cfg, bad)
    if bad:
        raise ConfigError("invalid configuration keys", bad)
    return cfg


def load_config(path: str | Path | None, override: dict | None = None) -> dict:
    user: dict = {}
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be an object")
    cfg = build_config(user)
    if override:
        cfg = build_config(_deep_update(cfg, override))
    return cfg


def _deep_update(base: dict, upd: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in upd.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_update(out[k], v)
        else:
            out[k] = v
    return out

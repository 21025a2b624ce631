import json

import numpy as np
import pytest

from conftest import make_field
from sitefusion import io
from sitefusion.cluster import ClusterParams, cluster_detections
from sitefusion.config import FORMAT_VERSION, build_config, load_config
from sitefusion.exceptions import ConfigError, ParseError
from sitefusion.features import Candidate, CandidateFeatures, ComponentValues
from sitefusion.geo import DistanceModel, Point


def test_fields_roundtrip(tmp_path, rng):
    fields = {
        "tel": make_field(rng.uniform(0, 1000, (20, 2)), rng.uniform(0, 1, 20), stride=8, cls="tel"),
        "site": make_field(rng.uniform(0, 1000, (5, 2)), rng.uniform(0, 1, 5), stride=75, cls="site", ids=np.arange(100, 105)),
    }
    p = tmp_path / "fields.csv"
    io.write_fields(p, fields)
    back = io.read_fields(p)
    for k, f in fields.items():
        assert back[k].stride == f.stride
        assert np.array_equal(back[k].x, f.x) and np.array_equal(back[k].scores, f.scores)
    assert json.loads(io.meta_path(p).read_text())["format_version"] == FORMAT_VERSION


def test_fields_keep_distance_model(tmp_path):
    f = make_field([(120.0, 25.0)], cls="tel")
    f.model = DistanceModel("haversine")
    p = tmp_path / "f.csv"
    io.write_fields(p, {"tel": f})
    assert io.read_fields(p)["tel"].model == DistanceModel("haversine")


def test_clusters_roundtrip(tmp_path, rng):
    f = make_field(rng.uniform(0, 100, (50, 2)), rng.uniform(0.9, 1, 50), stride=4, cls="tel")
    clusters = cluster_detections(f, ClusterParams(R=16, stride=4))
    p = tmp_path / "c.csv"
    io.write_clusters(p, clusters)
    back = io.read_clusters(p)
    assert [(c.rank, c.score, c.location, c.seed_id, c.member_count) for c in back] == [
        (c.rank, c.score, c.location, c.seed_id, c.member_count) for c in clusters
    ]


def test_candidates_and_features_roundtrip(tmp_path):
    cands = [Candidate(1, Point(1.5, 2.5), 0.25, True), Candidate(2, Point(3.0, 4.0), 0.5, None)]
    p = tmp_path / "cands.csv"
    io.write_candidates(p, cands)
    assert io.read_candidates(p) == cands
    feats = [CandidateFeatures(1, {"tel": ComponentValues(0.5, 3, 2, 0.125)}, True)]
    q = tmp_path / "feats.csv"
    io.write_features(q, feats)
    assert io.read_features(q) == feats


def test_parse_error_names_file_and_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("id,class,x,y,score,tile\n1,tel,0,0,0.5,\n2,tel,zero,0,0.5,\n")
    with pytest.raises(ParseError) as exc:
        io.read_fields(p, default_strides={"tel": 8.0})
    assert exc.value.line == 3 and str(p) in str(exc.value)


def test_parse_error_on_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError) as exc:
        io.read_candidates(p)
    assert exc.value.line == 1


def test_config_defaults():
    cfg = build_config()
    assert (cfg["site"]["alpha"], cfg["site"]["R"]) == (0.9, 300.0)
    assert (cfg["components"]["alpha"], cfg["components"]["R"]) == (0.99, 32.0)
    assert cfg["features"]["radius"] == 150.0
    assert cfg["fusion"]["mlp"]["hidden_layer_sizes"] == [100, 100]


def test_config_lists_offending_keys(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"site": {"alpah": 0.9}, "bogus": 1, "components": {"R": -3}}))
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert set(exc.value.keys) >= {"site.alpah", "bogus", "components.R"}


def test_config_malformed_json(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text("{not json")
    with pytest.raises((ConfigError, ParseError)):
        load_config(p)

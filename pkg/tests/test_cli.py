import json
import subprocess
import sys

import pytest

from sitefusion.cli import main

SMALL = {
    "synth": {"scenario": {"aoi_km": [40, 40], "n_sites": 4, "detectors": {"site": {"hotspots": 20}}}, "train_sites": 16},
    "fusion": {"mlp": {"epochs": 60}},
    "eval": {"area_km2": 1600.0},
}


@pytest.fixture(scope="module")
def small_cfg(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "small.json"
    p.write_text(json.dumps(SMALL))
    return p


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, small_cfg):
    out = tmp_path_factory.mktemp("pipeline") / "run"
    assert main(["pipeline", "--config", str(small_cfg), "--output", str(out)]) == 0
    return out


def _files(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pipeline_report(run_dir):
    report = json.loads((run_dir / "report.json").read_text())
    assert report["metrics"]["tpr"] == 1.0
    assert report["format_version"] == 1
    assert report["config"]["synth"]["scenario"]["n_sites"] == 4


def test_pipeline_idempotent(run_dir, small_cfg, tmp_path):
    again = tmp_path / "run"
    assert main(["pipeline", "--config", str(small_cfg), "--output", str(again)]) == 0
    assert _files(again) == _files(run_dir)


def test_cluster_echoes_defaults(run_dir, tmp_path):
    out = tmp_path / "clusters.csv"
    assert main(["cluster", "--input", str(run_dir / "aoi" / "fields.csv"), "--class", "tel", "--output", str(out)]) == 0
    meta = json.loads((tmp_path / "clusters.meta.json").read_text())
    assert meta["stage_defaults"] == {"site_alpha": 0.9, "site_R": 300.0, "component_alpha": 0.99, "component_R": 32.0, "feature_radius": 150.0}
    assert meta["params"]["R"] == 32.0 and meta["params"]["alpha"] == 0.99
    assert meta["config"]["cluster"]["penalty"] == "truncate"


def test_cluster_penalty_flag(run_dir, tmp_path):
    out = tmp_path / "clusters.csv"
    args = ["cluster", "--input", str(run_dir / "aoi" / "fields.csv"), "--class", "site", "--penalty", "flat", "--output", str(out)]
    assert main(args) == 0
    meta = json.loads((tmp_path / "clusters.meta.json").read_text())
    assert meta["params"]["penalty"] == "flat" and meta["params"]["membership_radius"] == 600.0


def test_eval_empty_decisions(run_dir, tmp_path):
    dec = tmp_path / "empty.csv"
    dec.write_text("candidate_id,decision,score,model,combo,feature_type\n")
    out = tmp_path / "r.json"
    assert main(["eval", "--input", str(dec), "--candidates", str(run_dir / "aoi" / "candidates.csv"), "--output", str(out)]) == 0
    m = json.loads(out.read_text())["metrics"]
    assert m["f1"] == 0.0 and m["tp"] == 0


def test_malformed_input_reports_file_and_line(tmp_path, capsys):
    bad = tmp_path / "fields.csv"
    bad.write_text("id,class,x,y,score,tile\n1,tel,0,0,2.5,\n")
    code = main(["cluster", "--input", str(bad), "--class", "tel", "--output", str(tmp_path / "c.csv")])
    err = json.loads(capsys.readouterr().err)
    assert code == 2 and err["error"] == "parse-error" and err["line"] == 2 and err["file"].endswith("fields.csv")


def test_config_error_lists_keys(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fusion": {"modle": "mlp"}, "features": {"radius": 0}}))
    code = main(["synth", "--config", str(cfg), "--output", str(tmp_path / "o")])
    err = json.loads(capsys.readouterr().err)
    assert code == 2 and err["error"] == "config-error"
    assert set(err["keys"]) == {"fusion.modle", "features.radius"}


def test_fuse_with_saved_model(run_dir, tmp_path):
    feats = str(run_dir / "aoi" / "features.csv")
    out = tmp_path / "d.csv"
    assert main(["fuse", "--input", feats, "--load-model", str(run_dir / "model.json"), "--output", str(out)]) == 0
    assert out.read_bytes() == (run_dir / "decisions.csv").read_bytes()


@pytest.mark.parametrize("model", ["or", "anfis"])
def test_fuse_other_models(run_dir, tmp_path, model):
    out = tmp_path / "d.csv"
    args = ["fuse", "--input", str(run_dir / "aoi" / "features.csv"), "--train", str(run_dir / "train" / "features.csv"),
            "--model", model, "--combo", "empty+3", "--output", str(out)]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "candidate_id,decision,score,model,combo,feature_type"
    assert all(l.split(",")[3:5] == [model, "empty+3"] for l in lines[1:])


def test_fuse_with_dta_thresholds(run_dir, tmp_path):
    out = tmp_path / "d.csv"
    args = ["fuse", "--input", str(run_dir / "aoi" / "features.csv"), "--train", str(run_dir / "train" / "features.csv"),
            "--thresholds", str(run_dir / "thresholds.json"), "--model", "or", "--output", str(out)]
    assert main(args) == 0


def test_rank_weights_file(run_dir, tmp_path):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"site": 1.0}))
    out = tmp_path / "ranked.csv"
    args = ["rank", "--input", str(run_dir / "aoi" / "features.csv"), "--candidates", str(run_dir / "aoi" / "candidates.csv"),
            "--weights", str(w), "--output", str(out)]
    assert main(args) == 0
    rows = [l.split(",") for l in out.read_text().splitlines()[1:]]
    scores = [float(r[2]) for r in rows]
    assert scores == sorted(scores, reverse=True)


def test_sweep_plot(run_dir, tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["sweep-plot", "--input", str(run_dir / "train" / "features.csv"), "--class", "tel", "--output", str(out)]
    assert main(args) == 0
    svg = (tmp_path / "sweep.svg").read_bytes()
    assert svg.lstrip().startswith(b"<?xml") and b"<svg" in svg
    assert out.read_text().splitlines()[0] == "threshold,tpr,ppv,f1"
    first = svg
    assert main(args) == 0
    assert (tmp_path / "sweep.svg").read_bytes() == first


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "sitefusion", "eval", "--output", str(tmp_path / "x"), "--input", str(tmp_path / "missing.csv")],
                       capture_output=True, text=True)
    assert r.returncode != 0
    assert "error" in json.loads(r.stderr)

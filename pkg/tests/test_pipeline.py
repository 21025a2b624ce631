import pytest

from sitefusion.config import build_config
from sitefusion.features import Candidate
from sitefusion.geo import Point
from sitefusion.pipeline import candidates_from_clusters, label_candidates, truth_map, weight_profile
from sitefusion.cluster import Cluster
from sitefusion.rank import WeightProfile


def test_each_site_claims_best_scored_candidate():
    cands = [Candidate(1, Point(0, 0), 0.4), Candidate(2, Point(100, 0), 0.9), Candidate(3, Point(5000, 0), 0.8)]
    missed = label_candidates(cands, [Point(50, 0), Point(9000, 0)], match_radius=300)
    assert [c.label for c in cands] == [False, True, False]
    assert missed == [1]


def test_two_sites_do_not_share_a_candidate():
    cands = [Candidate(1, Point(0, 0), 0.9), Candidate(2, Point(200, 0), 0.5)]
    missed = label_candidates(cands, [Point(50, 0), Point(100, 0)], match_radius=300)
    assert [c.label for c in cands] == [True, True] and missed == []


def test_truth_map_adds_missed_sites():
    cands = [Candidate(1, Point(0, 0), label=True), Candidate(2, Point(0, 0), label=False)]
    assert truth_map(cands, 2) == {1: True, 2: False, -1: True, -2: True}


def test_candidates_follow_cluster_rank():
    clusters = [Cluster(0, "site", 5, Point(1, 2), [], 3.0, 0.7, rank=1), Cluster(1, "site", 9, Point(3, 4), [], 1.0, 0.2, rank=2)]
    cands = candidates_from_clusters(clusters)
    assert [(c.id, c.location, c.site_score) for c in cands] == [(1, Point(1, 2), 0.7), (2, Point(3, 4), 0.2)]


def test_weight_profiles():
    assert weight_profile("expert") == WeightProfile.expert()
    assert weight_profile({"site": 2.0})["site"] == 2.0
    with pytest.raises(ValueError):
        weight_profile("learned")


def test_default_config_is_valid():
    cfg = build_config()
    assert cfg["fusion"]["model"] == "mlp" and cfg["rank"]["weights"] == "expert"

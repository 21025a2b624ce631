import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from conftest import grid_field, make_field, saturated_grid
from oracles import naive_cluster, polar_disc_integral
from sitefusion.cluster import (
    Cluster,
    ClusterParams,
    ModeClustering,
    cluster_detections,
    cluster_field,
    norm_constants,
    penalty_weight,
    top_k,
)
from sitefusion.exceptions import InvalidInputError
from sitefusion.field import amplify_array
from sitefusion.geo import Point


def test_unit_aperture_constants():
    nc = norm_constants(1.0, 1.0)
    assert nc.n_volume == pytest.approx(1.6603, abs=1e-4)
    assert nc.n_max_p == pytest.approx(math.pi)
    assert nc.c_norm == pytest.approx(5.2160, abs=1e-4)


def test_site_detector_c_norm():
    assert norm_constants(300, 75).c_norm == pytest.approx(1335.27, abs=0.01)


@pytest.mark.parametrize("rp", [1, 2, 4, 8])
def test_n_volume_matches_polar_integration(rp):
    # integrate in grid units, where the decay length is R' itself
    expected = polar_disc_integral(lambda r: math.exp(-r / rp), rp)
    assert norm_constants(rp * 10.0, 10.0).n_volume == pytest.approx(expected, rel=1e-9)


def test_log_squared_identity():
    from scipy.integrate import quad

    val, _ = quad(lambda s: math.log(1 / s) ** 2, 1 / math.e, 1)
    assert val == pytest.approx(2 - 5 / math.e, abs=1e-12)


def test_penalty_weights():
    R = 10.0
    assert penalty_weight(5, R, "truncate") == 1.0
    assert penalty_weight(10, R, "truncate") == 0.0
    assert penalty_weight(15, R, "flat") == -1.0
    assert penalty_weight(15, R, "exp") == pytest.approx(-math.exp(-0.5))
    assert penalty_weight(15, R, "exp-decay") == penalty_weight(15, R, "exp")


def test_penalty_exp_ranges_over_annulus():
    d = np.linspace(10, 19.999, 50)
    w = penalty_weight(d, 10.0, "exp")
    assert np.all(np.diff(w) < 0)
    assert w[0] == pytest.approx(-math.exp(-1))
    assert w[-1] > -1


def test_unknown_penalty():
    with pytest.raises(InvalidInputError):
        penalty_weight(1.0, 1.0, "square")


def test_single_detection_cluster():
    f = make_field([(5, 5)], [1.0], stride=1)
    (c,) = cluster_detections(f, ClusterParams(R=1, stride=1))
    assert c.member_count == 1
    assert c.location == Point(5, 5)
    assert c.score == pytest.approx(1 / 5.2160, abs=1e-4)
    assert c.rank == 1


def test_empty_field():
    assert cluster_detections(make_field(np.empty((0, 2))), ClusterParams(R=1, stride=1)) == []


@pytest.mark.parametrize("rp,lo,hi", [(8, 0.9, 1.1), (16, 0.95, 1.05)])
def test_saturated_grid_scores_near_one(rp, lo, hi):
    top = cluster_detections(saturated_grid(rp), ClusterParams(R=float(rp), stride=1.0))[0]
    assert lo <= top.score <= hi
    assert top.location == Point(2.0 * rp, 2.0 * rp)


def test_saturated_scores_converge_to_one():
    scores = [cluster_detections(saturated_grid(rp), ClusterParams(R=float(rp), stride=1.0))[0].score for rp in (4, 8, 16)]
    gaps = [abs(1 - s) for s in scores]
    assert gaps[0] > gaps[1] > gaps[2]


def _cluster_view(clusters):
    return [(c.seed_id, [(m.id, m.weight, m.distance) for m in c.members], c.score) for c in clusters]


def _oracle_view(ref):
    return [(r["seed"], r["members"], r["score"]) for r in ref]


@pytest.mark.parametrize("penalty", ["truncate", "flat", "exp"])
def test_matches_naive_reference(penalty):
    rng = np.random.default_rng({"truncate": 1, "flat": 2, "exp": 3}[penalty])
    for _ in range(15):
        n = int(rng.integers(1, 120))
        xy = rng.uniform(0, 150, (n, 2))
        s = rng.uniform(0, 1, n)
        ids = rng.permutation(10 * n)[:n]
        f = make_field(xy, s, stride=4.0, ids=ids)
        p = ClusterParams(R=16.0, stride=4.0, penalty=penalty)
        got = cluster_field(f, amplify_array(f, 16.0), p)
        ref = naive_cluster(ids.tolist(), xy[:, 0], xy[:, 1], s, 16.0, 4.0, penalty)
        assert _cluster_view(got) == _oracle_view(ref)


def test_list_and_array_deltas_agree(rng):
    from sitefusion.field import amplify

    f = make_field(rng.uniform(0, 50, (40, 2)), rng.uniform(0, 1, 40), stride=2.0)
    p = ClusterParams(R=8.0, stride=2.0)
    a = cluster_field(f, amplify(f, 8.0), p)
    b = cluster_field(f, amplify_array(f, 8.0), p)
    assert _cluster_view(a) == _cluster_view(b)


def test_top_k_tie_on_seed_id():
    c7 = Cluster(0, "c", 7, Point(0, 0), [], 1.0, 0.5)
    c3 = Cluster(1, "c", 3, Point(0, 0), [], 1.0, 0.5)
    c9 = Cluster(2, "c", 9, Point(0, 0), [], 2.0, 0.9)
    assert [c.seed_id for c in top_k([c7, c3, c9], 2)] == [9, 3]
    assert top_k([c7], 0) == []
    with pytest.raises(InvalidInputError):
        top_k([c7], -1)


def test_truncate_partitions_field(rng):
    f = make_field(rng.uniform(0, 300, (200, 2)), rng.uniform(0, 1, 200), stride=5.0)
    clusters = cluster_detections(f, ClusterParams(R=20.0, stride=5.0))
    ids = sorted(m.id for c in clusters for m in c.members)
    assert ids == sorted(f.ids.tolist())
    assert all(m.weight == 1.0 for c in clusters for m in c.members)


def test_alpha_cut_excluded_from_membership():
    f = make_field([(0, 0), (1, 0), (2, 0)], [1.0, 0.5, 1.0])
    clusters = cluster_detections(f, ClusterParams(R=5, stride=1, alpha=0.9))
    assert sorted(m.id for c in clusters for m in c.members) == [0, 2]


@pytest.mark.parametrize("rp", [4, 6, 8])
def test_score_bound_on_grid_fields(rp):
    rng = np.random.default_rng(rp)
    for _ in range(10):
        side = 3 * rp
        keep = rng.uniform(size=side * side) < rng.uniform(0.2, 1.0)
        i, j = np.divmod(np.nonzero(keep)[0], side)
        xy = np.column_stack((i, j)).astype(float)
        f = make_field(xy, rng.uniform(0, 1, len(xy)), stride=1.0)
        clusters = cluster_detections(f, ClusterParams(R=float(rp), stride=1.0))
        assert max(c.score for c in clusters) <= 1.2


def _ring_scene(R=10.0, n_ring=24):
    rng = np.random.default_rng(0)
    core = rng.uniform(-0.1 * R, 0.1 * R, (30, 2))
    ang = np.linspace(0, 2 * np.pi, n_ring, endpoint=False)
    rad = np.linspace(1.2 * R, 1.79 * R, n_ring)
    ring = np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))
    return core, ring


def _top_score(xy, penalty, R=10.0):
    f = make_field(xy, stride=1.0)
    return cluster_detections(f, ClusterParams(R=R, stride=1.0, penalty=penalty))[0]


def test_ring_penalty_behavior():
    core, ring = _ring_scene()
    both = np.vstack((core, ring))
    base = {p: _top_score(core, p).score for p in ("truncate", "flat", "exp")}
    after = {p: _top_score(both, p).score for p in ("truncate", "flat", "exp")}
    assert after["truncate"] == base["truncate"]
    assert after["flat"] < base["flat"]
    assert after["exp"] < base["exp"]
    assert after["flat"] <= after["exp"]


def test_penalty_seed_is_core_point():
    core, ring = _ring_scene()
    top = _top_score(np.vstack((core, ring)), "flat")
    assert top.seed_id < len(core)


def test_resolution_independence():
    R = 64.0
    scores = {}
    for stride in (16.0, 8.0):
        side = int(6 * R / stride) + 1
        f = grid_field(side, stride=stride, origin=(-3 * R, -3 * R))
        keep = np.hypot(f.x, f.y) < 1.5 * R
        top = cluster_detections(f.subset(keep), ClusterParams(R=R, stride=stride))[0]
        scores[stride] = top.score
    assert abs(scores[16.0] - scores[8.0]) / scores[8.0] < 0.15


def test_determinism(rng):
    f = make_field(rng.uniform(0, 100, (100, 2)), rng.uniform(0, 1, 100), stride=2.0)
    p = ClusterParams(R=10.0, stride=2.0, penalty="exp")
    assert _cluster_view(cluster_detections(f, p)) == _cluster_view(cluster_detections(f, p))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["truncate", "flat", "exp"]))
def test_each_detection_in_at_most_one_cluster(seed, penalty):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 60))
    f = make_field(rng.uniform(0, 40, (n, 2)), rng.uniform(0, 1, n), stride=1.0)
    clusters = cluster_detections(f, ClusterParams(R=5.0, stride=1.0, penalty=penalty))
    ids = [m.id for c in clusters for m in c.members]
    assert len(ids) == len(set(ids)) == n
    assert [c.rank for c in clusters] == list(range(1, len(clusters) + 1))
    for c in clusters:
        assert c.members[0].id == c.seed_id and c.members[0].distance == 0.0


def test_membership_radius_below_R_rejected():
    with pytest.raises(InvalidInputError):
        ClusterParams(R=10, stride=1, membership_radius=5)


def test_estimator_api(rng):
    X = np.vstack((rng.normal(0, 1, (30, 2)), rng.normal(50, 1, (20, 2))))
    est = ModeClustering(R=5.0, stride=1.0, alpha=0.0).fit(X)
    assert est.labels_.shape == (50,)
    assert set(est.labels_[:30]) == {0}
    assert set(est.labels_[30:]) == {1}
    assert est.cluster_centers_[0] == pytest.approx([0, 0], abs=1.0)
    assert np.all(np.diff(est.cluster_scores_) <= 0)
    assert clone(est).get_params() == est.get_params()


def test_estimator_alpha_cut_labels(rng):
    X = rng.uniform(0, 10, (20, 2))
    w = np.where(np.arange(20) < 10, 1.0, 0.5)
    est = ModeClustering(R=3.0, stride=1.0, alpha=0.9).fit(X, sample_weight=w)
    assert np.all(est.labels_[10:] == -1)
    assert np.all(est.labels_[:10] >= 0)

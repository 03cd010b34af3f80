import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orchid.analysis import (
    FeatureDistribution,
    bonferroni_adjust,
    expw_kernel_matrix,
    feature_distribution,
    kpca_embed,
    mmd_test,
    nmi,
    quantile_vector,
    rbf_kernel_matrix,
    spectral_cluster,
    wcc,
)
from orchid.curvature import CurvatureConfig, all_curvatures
from orchid.errors import EmptyFeature, ShapeError
from orchid.generators import gen_hsbm, make_hyperclique
from orchid.hypergraph import parse_hypergraph
from orchid.transport import w1_empirical_1d


def fd(values, sid="s"):
    return FeatureDistribution(sid, "edge_curvature", values)


def test_feature_from_result_and_graph():
    h = make_hyperclique(3, 2)
    res = all_curvatures(h, CurvatureConfig("en", "mean", 0.0))
    assert feature_distribution(res, "edge_curvature").samples.tolist() == [0.5, 0.5, 0.5]
    assert feature_distribution(h, "node_degree").samples.tolist() == [2, 2, 2]
    g = parse_hypergraph("a b\na b c")
    assert feature_distribution(g, "edge_cardinality").samples.tolist() == [2, 3]
    assert feature_distribution(g, "edge_neighborhood_size").samples.tolist() == [1, 1]
    assert feature_distribution(g, "node_neighborhood_size").samples.tolist() == [2, 2, 2]


def test_feature_from_result_document():
    h = parse_hypergraph("a b\nb c")
    doc = all_curvatures(h, CurvatureConfig()).to_json(h)
    assert feature_distribution(doc, "directional_curvature").samples.tolist() == [0.0, 0.0]
    assert len(feature_distribution(doc, "node_curvature_edges")) == 3


def test_empty_feature():
    h = parse_hypergraph("a\nb")
    res = all_curvatures(h, CurvatureConfig())
    with pytest.raises(EmptyFeature):
        feature_distribution(res, "edge_curvature")
    with pytest.raises(EmptyFeature):
        feature_distribution(all_curvatures(h, CurvatureConfig(), which=[]), "edge_curvature")


def test_quantile_vector():
    assert quantile_vector([3.0] * 5, 8).tolist() == [3.0] * 8
    assert quantile_vector([0, 1], 2).tolist() == [0, 1]
    grid = np.linspace(0, 1, 101)
    q = quantile_vector(grid, 64)
    true = (np.arange(64) + 0.5) / 64
    assert np.max(np.abs(q - true)) <= 1 / len(grid) + 1e-12
    # sorted-sample oracle: the ceil(n p)-th order statistic
    s = np.sort(grid)
    oracle = s[np.ceil(len(s) * true).astype(int) - 1]
    assert np.allclose(q, oracle)


def test_rbf_kernel():
    k = rbf_kernel_matrix([np.zeros(3), np.zeros(3), np.ones(3)], gamma=0.5)
    assert k.values[0, 1] == 1.0
    assert k.values[0, 2] == pytest.approx(np.exp(-1.5))
    tiny = rbf_kernel_matrix([np.zeros(3), np.ones(3)], gamma=1e-12)
    assert np.allclose(tiny.values, 1.0)


def test_rbf_kernel_is_psd():
    rng = np.random.default_rng(0)
    dists = [fd(rng.normal(loc=rng.random(), size=30), str(i)) for i in range(12)]
    k = rbf_kernel_matrix(dists)
    assert np.allclose(k.values, k.values.T)
    assert np.allclose(np.diag(k.values), 1.0)
    assert np.linalg.eigvalsh(k.values).min() > -1e-10


def test_expw_kernel_matches_direct_w1():
    a, b = fd([0.0, 1.0, 2.0], "a"), fd([0.5, 3.0], "b")
    k = expw_kernel_matrix([a, b], gamma=0.7)
    assert k.values[0, 1] == pytest.approx(np.exp(-0.7 * w1_empirical_1d(a.samples, b.samples)))
    assert np.allclose(np.diag(k.values), 1.0)
    assert k.ids == ["a", "b"]


def test_median_gamma_fallback_warns():
    with pytest.warns(RuntimeWarning):
        k = expw_kernel_matrix([fd([1.0, 2.0]), fd([1.0, 2.0])])
    assert k.gamma == 1.0


def test_kpca():
    same = np.ones((4, 4))
    assert np.allclose(kpca_embed(same, 2), 0.0)
    two = kpca_embed(np.array([[1.0, 0.2], [0.2, 1.0]]), 1)
    assert two[0, 0] == pytest.approx(-two[1, 0])
    rng = np.random.default_rng(1)
    x = rng.normal(size=(8, 3))
    k = x @ x.T
    coords = kpca_embed(k, 8)
    h = np.eye(8) - 1 / 8
    assert np.allclose(coords @ coords.T, h @ k @ h, atol=1e-8)
    for c in range(coords.shape[1]):
        col = coords[:, c]
        if np.abs(col).max() > 1e-9:
            assert col[np.argmax(np.abs(col))] > 0


def test_spectral_cluster_blocks():
    k = np.kron(np.eye(2), np.ones((3, 3)))
    labels = spectral_cluster(k, 2, seed=0)
    assert labels.tolist() == [0, 0, 0, 1, 1, 1]
    assert len(set(spectral_cluster(np.eye(5) + 0.01, 5, seed=0).tolist())) == 5
    assert spectral_cluster(k, 2, seed=0).tolist() == spectral_cluster(k, 2, seed=0).tolist()


def test_spectral_cluster_recovers_planted_groups():
    planted = [[0.3, 0.02], [0.02, 0.3]]
    flat = [[0.1, 0.1], [0.1, 0.1]]
    dists = []
    for g in range(2):
        for s in range(6):
            sample = gen_hsbm([20, 20], [20, 20], planted if g else flat, seed=s + 50 * g)
            res = all_curvatures(sample.hypergraph, CurvatureConfig("en", "mean", 0.0), which=["edge"])
            dists.append(feature_distribution(res, "edge_curvature", source_id=f"{g}-{s}"))
    labels = spectral_cluster(expw_kernel_matrix(dists), 2, seed=0)
    assert labels.tolist() in ([0] * 6 + [1] * 6, [1] * 6 + [0] * 6)


def test_mmd_identical_and_separated():
    x = np.random.default_rng(0).normal(size=40)
    stat, p = mmd_test(x, x, B=100, seed=0)
    assert stat <= 1e-12
    assert p > 0.5
    stat, p = mmd_test(np.zeros(50), np.ones(50), B=200, seed=0)
    assert stat > 0
    assert p == pytest.approx(1 / 201)


def test_mmd_is_seeded():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=30), rng.normal(0.3, size=30)
    assert mmd_test(x, y, 50, seed=9) == mmd_test(x, y, 50, seed=9)
    _, p = mmd_test(x, y, 50, seed=9)
    assert 1 / 51 <= p <= 1


def test_bonferroni():
    assert bonferroni_adjust([0.01]).tolist() == [0.01]
    assert bonferroni_adjust([0.01, 0.5]).tolist() == [0.02, 1.0]
    assert bonferroni_adjust([0.05 / 4] * 4) == pytest.approx([0.05] * 4)


def test_wcc():
    same = [fd([0.0, 1.0], str(i)) for i in range(4)]
    assert wcc([0, 0, 1, 1], same) == 0.0
    assert wcc([0, 0], same[:2]) == 0.0
    groups = [fd([0.0]), fd([0.0]), fd([1.0]), fd([1.0])]
    assert wcc([0, 0, 1, 1], groups) == 0.0
    bumped = [fd([0.2]), fd([0.0]), fd([1.0]), fd([1.0])]
    assert wcc([0, 0, 1, 1], bumped) > 0.0
    # relabeling and reordering do not matter
    assert wcc(["b", "b", "a", "a"], bumped) == pytest.approx(wcc([0, 0, 1, 1], bumped))
    order = [2, 0, 3, 1]
    assert wcc([[0, 0, 1, 1][k] for k in order], [bumped[k] for k in order]) == pytest.approx(
        wcc([0, 0, 1, 1], bumped)
    )
    with pytest.raises(ShapeError):
        wcc([0, 1], same)


def test_wcc_formula_by_hand():
    d = [fd([0.0]), fd([1.0]), fd([3.0])]
    # clusters {0, 1} and {2}: intra 1, cross means (3 + 2) / 2 both ways
    assert wcc([0, 0, 1], d) == pytest.approx(1 / (1 + 2.5 + 2.5))


def test_nmi():
    rng = np.random.default_rng(0)
    x = rng.normal(size=500)
    assert nmi(x, x, 10) == pytest.approx(1.0)
    assert nmi(x, 3 - 2 * x, 10) == pytest.approx(1.0)
    assert nmi(x, rng.normal(size=500), 5) < 0.05
    assert nmi(np.ones(5), np.ones(5), 4) == 1.0
    assert nmi(np.ones(5), np.arange(5.0), 4) == 0.0
    with pytest.raises(ShapeError):
        nmi([1, 2], [1, 2, 3])
    for norm in ("min", "mean", "sqrt"):
        assert nmi(x, x, 10, norm) == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=40),
    st.integers(2, 12),
    st.data(),
)
def test_nmi_symmetric_and_bounded(xs, bins, data):
    ys = data.draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=len(xs), max_size=len(xs)))
    a, b = nmi(xs, ys, bins), nmi(ys, xs, bins)
    assert a == pytest.approx(b)
    assert 0.0 <= a <= 1.0


def test_unknown_feature_kind():
    with pytest.raises(ValueError):
        FeatureDistribution("s", "edge_weight", [1.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(fd([1.0, 2.0])) == 2

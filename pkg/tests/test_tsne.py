import numpy as np
import pytest

from vcr.tsne import joint_affinities, project_tsne


def three_clusters(rng, per_cluster=20, dims=10, spread=0.3):
    centers = (0.0, 5.0, 10.0)
    pts = np.vstack([rng.normal(loc=c, scale=spread, size=(per_cluster, dims))
                     for c in centers])
    labels = np.repeat(np.arange(len(centers)), per_cluster)
    return pts, labels


def mean_intra_inter(positions, labels):
    intra, inter = [], []
    n = len(labels)
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.linalg.norm(positions[i] - positions[j]))
            (intra if labels[i] == labels[j] else inter).append(d)
    return np.mean(intra), np.mean(inter)


def test_separated_gaussians_stay_separated():
    rng = np.random.default_rng(7)
    pts, labels = three_clusters(rng)
    positions = project_tsne(pts, perplexity=10.0, iterations=1000, seed=0)
    intra, inter = mean_intra_inter(positions, labels)
    assert intra < inter


def test_same_seed_identical_output():
    rng = np.random.default_rng(1)
    pts, _ = three_clusters(rng)
    a = project_tsne(pts, perplexity=10.0, iterations=500, seed=42)
    b = project_tsne(pts, perplexity=10.0, iterations=500, seed=42)
    assert np.array_equal(a, b)


def test_different_seed_different_output():
    rng = np.random.default_rng(1)
    pts, _ = three_clusters(rng)
    a = project_tsne(pts, perplexity=10.0, iterations=300, seed=1)
    b = project_tsne(pts, perplexity=10.0, iterations=300, seed=2)
    assert not np.array_equal(a, b)


def test_too_few_points_rejected():
    with pytest.raises(ValueError, match="at least 4"):
        project_tsne(np.zeros((3, 5)), perplexity=5.0)


def test_perplexity_bound_enforced():
    with pytest.raises(ValueError, match="perplexity"):
        project_tsne(np.random.default_rng(0).normal(size=(10, 5)), perplexity=5.0)


def test_degenerate_identical_vectors_no_crash():
    positions = project_tsne(np.ones((8, 3)), perplexity=2.0, iterations=300, seed=0)
    assert positions.shape == (8, 2)
    assert np.all(np.isfinite(positions))


def test_kl_non_increasing_at_checkpoints():
    rng = np.random.default_rng(3)
    pts, _ = three_clusters(rng)
    for seed in (0, 1, 2):
        history = []
        project_tsne(pts, perplexity=10.0, iterations=1000, seed=seed,
                     kl_history=history)
        kls = [kl for _, kl in history]
        assert len(kls) == 15  # every 50 iterations from 250 to 950
        for earlier, later in zip(kls, kls[1:]):
            assert later <= earlier + 1e-3


def test_affinities_are_symmetric_distribution():
    rng = np.random.default_rng(5)
    pts, _ = three_clusters(rng, per_cluster=5)
    p = joint_affinities(pts, perplexity=4.0)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(p, p.T)
    assert np.all(p > 0)

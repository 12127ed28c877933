import numpy as np
import pytest

from jointscope.tsne import (
    TsneParams,
    conditional_probabilities,
    joint_probabilities,
    kl_divergence,
    kl_gradient,
    pairwise_sq_distances,
    run_tsne,
    tsne,
)


def brute_silhouette(coords, labels):
    """Independent O(n^2) silhouette, written against the textbook definition."""
    n = len(coords)
    dist = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
    values = []
    for i in range(n):
        same = labels == labels[i]
        same_others = same.copy()
        same_others[i] = False
        a = dist[i][same_others].mean()
        b = min(dist[i][labels == lab].mean() for lab in set(labels) - {labels[i]})
        values.append((b - a) / max(a, b))
    return float(np.mean(values))


def three_gaussians(seed=0):
    rng = np.random.default_rng(seed)
    centers = np.eye(3, 10) * 10.0
    pts, labels = [], []
    for k in range(3):
        pts.append(centers[k] + rng.normal(0.0, 1.0, (20, 10)))
        labels += [k] * 20
    return np.vstack(pts), np.array(labels)


def test_pairwise_distances_match_naive():
    rng = np.random.default_rng(1)
    x = rng.normal(0, 1, (20, 6))
    naive = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    assert np.allclose(pairwise_sq_distances(x), naive, atol=1e-9)


def test_p_matrix_properties():
    rng = np.random.default_rng(2)
    x = rng.normal(0, 1, (50, 8))
    p, achieved = joint_probabilities(x, 10.0)
    assert np.allclose(p, p.T, atol=1e-15)
    assert (p >= 0).all()
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(np.diag(p), 0.0)
    assert np.abs(achieved - np.log2(10.0)).max() <= 1e-3


def test_bandwidth_search_hits_target_within_tolerance():
    rng = np.random.default_rng(3)
    x = rng.normal(0, 1, (40, 5))
    d2 = pairwise_sq_distances(x)
    _, achieved = conditional_probabilities(d2, 8.0)
    assert np.abs(achieved - np.log2(8.0)).max() <= 1e-3


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    x = rng.normal(0, 1, (10, 4))
    p, _ = joint_probabilities(x, 3.0)
    y = rng.normal(0, 1, (10, 2))
    analytic = kl_gradient(p, y)
    h = 1e-6
    numeric = np.zeros_like(y)
    for i in range(10):
        for j in range(2):
            yp = y.copy()
            yp[i, j] += h
            ym = y.copy()
            ym[i, j] -= h
            numeric[i, j] = (kl_divergence(p, yp) - kl_divergence(p, ym)) / (2 * h)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-12)
    assert rel.max() <= 1e-4


def test_two_far_groups_separate():
    x = np.vstack([np.zeros((4, 5)), np.full((4, 5), 50.0)])
    coords = tsne(x, TsneParams(seed=2))
    ca, cb = coords[:4].mean(axis=0), coords[4:].mean(axis=0)
    within = np.concatenate([
        np.linalg.norm(coords[:4] - ca, axis=1),
        np.linalg.norm(coords[4:] - cb, axis=1),
    ])
    assert np.linalg.norm(ca - cb) > 5.0 * within.mean()


def test_three_gaussian_silhouette():
    x, labels = three_gaussians()
    coords = tsne(x, TsneParams(seed=3))
    assert brute_silhouette(coords, labels) >= 0.5


def test_deterministic_under_seed():
    x, _ = three_gaussians(5)
    a = tsne(x, TsneParams(seed=7, iterations=300))
    b = tsne(x, TsneParams(seed=7, iterations=300))
    assert np.array_equal(a, b)


def test_kl_descent_invariants():
    x, _ = three_gaussians(1)
    _, diag = run_tsne(x, TsneParams(seed=1))
    kl = diag.kl_history
    assert min(kl) >= 0.0
    windows = [float(np.mean(kl[i:i + 50])) for i in range(250, 1000, 50)]
    for earlier, later in zip(windows, windows[1:]):
        assert later <= earlier + 1e-12
    assert kl[-1] < 0.5 * kl[249]


def test_perplexity_clamped_for_small_n():
    x = np.random.default_rng(6).normal(0, 1, (9, 4))
    _, diag = run_tsne(x, TsneParams(perplexity=30.0, iterations=250, seed=0))
    assert diag.effective_perplexity <= (9 - 1) / 3.0


def test_input_validation():
    rng = np.random.default_rng(8)
    with pytest.raises(ValueError, match="at least 8"):
        tsne(rng.normal(0, 1, (5, 3)))
    bad = rng.normal(0, 1, (10, 3))
    bad[2, 1] = np.nan
    with pytest.raises(ValueError, match="finite"):
        tsne(bad)
    dup = np.zeros((10, 3))
    dup[-1] = 1.0  # nine identical rows > n-3
    with pytest.raises(ValueError, match="repeats"):
        tsne(dup)
    with pytest.raises(ValueError):
        TsneParams(iterations=100)
    with pytest.raises(ValueError):
        TsneParams(perplexity=-1.0)

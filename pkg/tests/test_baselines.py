import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from multisample.baselines import (fit_pca, kmeans, pca_projection, principal_directions,
                                   random_projection)
from multisample.core import Dataset, RngHandle


def brute_1d_two_means(x):
    # optimal 2-means in 1-D splits the sorted points into a prefix and suffix
    x = np.sort(x)
    best = np.inf
    for k in range(1, len(x)):
        l, r = x[:k], x[k:]
        best = min(best, ((l - l.mean()) ** 2).sum() + ((r - r.mean()) ** 2).sum())
    return best


def test_kmeans_single_cluster():
    X = np.random.default_rng(0).normal(size=(50, 3))
    res = kmeans(Dataset(X), 1)
    np.testing.assert_allclose(res.centers[0], X.mean(0))
    assert res.inertia == pytest.approx(((X - X.mean(0)) ** 2).sum())
    assert (res.assignments == 0).all()


@given(arrays(float, st.integers(3, 12), elements=st.floats(-100, 100)))
def test_kmeans_matches_brute_force_1d(x):
    if len(np.unique(x)) < 2:
        return
    res = kmeans(Dataset(x[:, None]), 2, restarts=10)
    # Lloyd from D^2 seeding is not guaranteed optimal, but on tiny 1-D data
    # ten restarts reach the contiguous optimum
    assert res.inertia == pytest.approx(brute_1d_two_means(x), rel=1e-6, abs=1e-6)


def test_kmeans_two_blobs():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(0, 0.1, (40, 2)), rng.normal(5, 0.1, (60, 2))])
    res = kmeans(Dataset(X), 2)
    a = res.assignments
    assert len(set(a[:40])) == 1 and len(set(a[40:])) == 1 and a[0] != a[-1]


def test_kmeans_k_equals_n():
    X = np.arange(6.0).reshape(3, 2)
    res = kmeans(Dataset(X), 3)
    assert res.inertia == pytest.approx(0.0)
    assert sorted(res.assignments) == [0, 1, 2]


def test_kmeans_trace_non_increasing_and_deterministic():
    X = np.random.default_rng(2).normal(size=(200, 4))
    r1 = kmeans(Dataset(X), 5, rng=RngHandle(3))
    r2 = kmeans(Dataset(X), 5, rng=RngHandle(3))
    assert np.all(np.diff(r1.inertia_trace) <= 1e-9)
    np.testing.assert_array_equal(r1.assignments, r2.assignments)
    assert r1.iterations_run >= 1


def test_kmeans_weights_act_as_multiplicity():
    X = np.array([[0.0], [1.0], [10.0]])
    dup = np.array([[0.0], [1.0], [1.0], [1.0], [10.0]])
    rw = kmeans(Dataset(X, weights=[1, 3, 1]), 2)
    rd = kmeans(Dataset(dup), 2)
    assert rw.inertia == pytest.approx(rd.inertia)


def test_kmeans_errors():
    d = Dataset(np.zeros((5, 2)))
    with pytest.raises(ValueError, match="distinct"):
        kmeans(d, 2)
    with pytest.raises(ValueError):
        kmeans(Dataset(np.eye(3)), 0)
    with pytest.raises(ValueError):
        kmeans(Dataset(np.eye(3)), 2, restarts=0)


def test_random_projection_identity_matrix():
    X = np.random.default_rng(0).normal(size=(10, 3))
    out = random_projection(Dataset(X), 3, matrix=np.eye(3))
    np.testing.assert_array_equal(out.points, X)


def test_random_projection_deterministic_and_shapes():
    d = Dataset(np.random.default_rng(0).normal(size=(10, 20)))
    a = random_projection(d, 4, RngHandle(7))
    b = random_projection(d, 4, RngHandle(7))
    np.testing.assert_array_equal(a.points, b.points)
    assert a.dim == 4 and len(a) == 10
    with pytest.raises(ValueError):
        random_projection(d, 21)
    with pytest.raises(ValueError):
        random_projection(d, 2, matrix=np.eye(3))


def test_random_projection_preserves_norm_on_average():
    x = np.random.default_rng(0).normal(size=(1, 50))
    d = Dataset(x)
    sq = [np.sum(random_projection(d, 5, RngHandle(s)).points ** 2) for s in range(1000)]
    # E|Rx|^2 = |x|^2 for R with N(0, 1/k) entries
    assert np.mean(sq) == pytest.approx(np.sum(x ** 2), rel=0.05)


def test_pca_line_keeps_all_variance():
    t = np.linspace(-1, 1, 30)
    X = np.outer(t, [3.0, 4.0]) + [1.0, 2.0]
    p = fit_pca(Dataset(X), 1)
    np.testing.assert_allclose(np.abs(p.components[0]), [0.6, 0.8], atol=1e-12)
    assert np.sum(p.data.points ** 2) == pytest.approx(np.sum((X - X.mean(0)) ** 2))


def test_pca_isotropic_keeps_fraction():
    X = np.random.default_rng(4).normal(size=(20000, 10))
    Y = pca_projection(Dataset(X), 3).points
    frac = np.sum(Y ** 2) / np.sum((X - X.mean(0)) ** 2)
    assert frac == pytest.approx(0.3, abs=0.03)


def test_pca_idempotent_and_orthonormal():
    X = np.random.default_rng(5).normal(size=(100, 6)) * [5, 4, 3, 2, 1, 0.5]
    p = fit_pca(Dataset(X), 3)
    np.testing.assert_allclose(p.components @ p.components.T, np.eye(3), atol=1e-10)
    q = fit_pca(p.data, 3)
    np.testing.assert_allclose(np.abs(q.data.points), np.abs(p.data.points), atol=1e-9)


def test_pca_diagonal_covariance_axes():
    X = np.random.default_rng(6).normal(size=(5000, 3)) * [1.0, 10.0, 3.0]
    p = fit_pca(Dataset(X), 2)
    assert np.argmax(np.abs(p.components[0])) == 1
    assert np.argmax(np.abs(p.components[1])) == 2


def test_gram_route_matches_covariance_route():
    X = np.random.default_rng(7).normal(size=(8, 30))
    vals_g, V_g, _ = principal_directions(X)            # n > N: Gram route
    vals_c, V_c, _ = principal_directions(np.vstack([X, X]))  # covariance route
    k = 5
    np.testing.assert_allclose(vals_g[:k], vals_c[:k], rtol=1e-9)
    np.testing.assert_allclose(np.abs(V_g[:k] @ V_c[:k].T), np.eye(k), atol=1e-8)


def test_pca_truncation_warns():
    X = np.random.default_rng(8).normal(size=(3, 10))
    with pytest.warns(RuntimeWarning, match="rank"):
        p = fit_pca(Dataset(X), 5)
    assert p.truncated and p.data.dim == 2
    with pytest.raises(ValueError):
        fit_pca(Dataset(X), 11)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multisample.core import Dataset, weighted_mean
from multisample.msp import (MSPBoundParams, ProjectionBasis, RankZeroBasisError, build_basis,
                             estimate_means, msp_bound, operation_count, project, reduce_rank)


def pairwise(X):
    return np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)


def test_estimate_means_singletons():
    p, q = np.array([1.0, 2.0]), np.array([-3.0, 0.5])
    got = estimate_means([Dataset([p]), Dataset([q])])
    np.testing.assert_array_equal(got[0], p)
    np.testing.assert_array_equal(got[1], q)


def test_estimate_means_identical():
    d = Dataset(np.arange(12.0).reshape(6, 2))
    a, b = estimate_means([d, d])
    np.testing.assert_array_equal(a, b)


def test_estimate_means_errors():
    with pytest.raises(ValueError):
        estimate_means([Dataset([[1.0]])])
    with pytest.raises(ValueError):
        estimate_means([Dataset([[1.0]]), Dataset([[1.0, 2.0]])])
    with pytest.raises(ValueError):
        estimate_means([Dataset([[1.0]]), Dataset(np.zeros((0, 1)))])


def test_mean_concentration_monte_carlo():
    # sup-norm error of a 50k-point mean in 10-D: per-coordinate sd 0.0045,
    # so 0.05 is ~11 sd; all seeds should pass, we require 95 of 100.
    mu = np.linspace(-2, 2, 10)
    hits = 0
    for seed in range(100):
        X = mu + np.random.default_rng(seed).standard_normal((50_000, 10))
        m = estimate_means([Dataset(X), Dataset(X[:10])])[0]
        hits += np.abs(m - mu).max() <= 0.05
    assert hits >= 95


def test_build_basis_single_difference():
    b = build_basis([np.array([0.0, 0.0]), np.array([1.0, 0.0])])
    np.testing.assert_array_equal(b.raw_vectors, [[-1.0, 0.0]])
    assert b.effective_rank == 1
    np.testing.assert_allclose(np.abs(b.orthonormal_basis), [[1.0, 0.0]])


def test_build_basis_triangle_preserves_distances():
    means = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    b = build_basis(list(means))
    assert b.effective_rank == 2
    proj = b.coordinates(means)
    np.testing.assert_allclose(pairwise(proj), pairwise(means), atol=1e-12)


def test_build_basis_identical_means_rank_zero():
    with pytest.warns(RuntimeWarning):
        b = build_basis([np.ones(3)] * 4)
    assert b.effective_rank == 0 and b.degenerate
    with pytest.raises(RankZeroBasisError):
        project(b, Dataset([[1.0, 2.0, 3.0]]))


def test_build_basis_bad_tol():
    with pytest.raises(ValueError):
        build_basis([np.zeros(2), np.ones(2)], rank_tol=1.5)


def test_basis_orthonormal_and_spans_raw(np_rng):
    means = list(np_rng.standard_normal((6, 9)))
    b = build_basis(means)
    B = b.orthonormal_basis
    np.testing.assert_allclose(B @ B.T, np.eye(b.effective_rank), atol=1e-9)
    assert b.effective_rank == 5
    assert np.all(b.residual_norms < 1e-9)
    assert np.all(np.diff(b.singular_values) <= 0)


@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_rank_equals_affine_dimension(d, extra, seed):
    # means lying exactly in a d-dimensional affine subspace of R^8
    rng = np.random.default_rng(seed)
    frame = np.linalg.qr(rng.standard_normal((8, d)))[0].T
    coeffs = rng.standard_normal((d + 1 + extra, d)) * 3
    means = list(rng.standard_normal(8) + coeffs @ frame)
    s = np.linalg.svd(np.diff(np.array(means), axis=0), compute_uv=False)
    if s[d - 1] < 1e-3 * s[0]:
        return  # nearly degenerate draw; the gap is not clear
    b = build_basis(means, rank_tol=1e-8)
    assert b.effective_rank == d


def test_max_rank_and_reduce_rank(np_rng):
    means = list(np_rng.standard_normal((5, 6)))
    b = build_basis(means, max_rank=2)
    assert b.effective_rank == 2 and b.orthonormal_basis.shape == (2, 6)
    r = reduce_rank(build_basis(means), 2)
    np.testing.assert_allclose(r.orthonormal_basis, b.orthonormal_basis)
    np.testing.assert_allclose(r.residual_norms, b.residual_norms)


def test_nearly_coplanar_means_truncate(np_rng):
    # six sample means within 1e-8 of a 2-D plane
    frame = np.linalg.qr(np_rng.standard_normal((10, 2)))[0].T
    means = np_rng.standard_normal((6, 2)) @ frame + 1e-8 * np_rng.standard_normal((6, 10))
    b = build_basis(list(means), rank_tol=1e-5)
    assert b.effective_rank == 2
    assert b.residual_norms.max() < 1e-6


def test_project_round_trip_on_span(np_rng):
    means = list(np_rng.standard_normal((4, 7)))
    b = build_basis(means)
    pts = b.anchor + np_rng.standard_normal((20, b.effective_rank)) @ b.orthonormal_basis
    back = b.reconstruct(project(b, Dataset(pts)).points)
    np.testing.assert_allclose(back, pts, atol=1e-9)


@given(st.integers(2, 6), st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_non_expansion_and_idempotence(m, n, seed):
    rng = np.random.default_rng(seed)
    b = build_basis(list(rng.standard_normal((m, n))))
    X = rng.standard_normal((10, n)) * 5
    P = b.coordinates(X)
    assert np.all(pairwise(P) <= pairwise(X) + 1e-9)
    R = b.reconstruct(P)
    np.testing.assert_allclose(b.reconstruct(b.coordinates(R)), R, atol=1e-9)


def test_project_preserves_weights_and_mean(np_rng):
    b = build_basis(list(np_rng.standard_normal((3, 5))))
    d = Dataset(np_rng.standard_normal((30, 5)), weights=np_rng.random(30) + 0.1, sample_id="x")
    p = project(b, d)
    assert p.sample_id == "x"
    np.testing.assert_array_equal(p.weights, d.weights)
    np.testing.assert_allclose(weighted_mean(p), b.coordinates(weighted_mean(d))[0], atol=1e-12)


def test_project_dimension_mismatch():
    b = build_basis([np.zeros(3), np.ones(3)])
    with pytest.raises(ValueError):
        project(b, Dataset([[1.0, 2.0]]))


def test_basis_json_round_trip(np_rng):
    b = build_basis(list(np_rng.standard_normal((4, 5))))
    back = ProjectionBasis.from_json(b.to_json())
    np.testing.assert_array_equal(back.orthonormal_basis, b.orthonormal_basis)
    np.testing.assert_array_equal(back.anchor, b.anchor)
    assert back.effective_rank == b.effective_rank


def test_distance_error_within_two_eps_A():
    # three means in the plane span{e1, e2}; three samples with distinct weights.
    rng = np.random.default_rng(3)
    n = 50
    mu = np.zeros((3, n))
    mu[1, 0] = 4.0
    mu[2, 1] = 4.0
    Phi = np.array([[0.6, 0.3, 0.1], [0.1, 0.6, 0.3], [0.3, 0.1, 0.6]])
    E = Phi @ mu
    v = E[:-1] - E[1:]
    alpha = np.linalg.lstsq(v.T, mu.T, rcond=None)[0].T  # mu_i = sum_j alpha_ij v_j
    np.testing.assert_allclose(alpha @ v, mu, atol=1e-12)
    A = np.abs(alpha).sum(axis=1).max()
    for _ in range(20):
        samples = []
        for j in range(3):
            lab = rng.choice(3, size=2000, p=Phi[j])
            samples.append(Dataset(mu[lab] + rng.standard_normal((2000, n))))
        b = build_basis(estimate_means(samples))
        eps = np.linalg.norm(v - b.raw_vectors, axis=1).max()
        err = np.abs(pairwise(mu) - pairwise(b.coordinates(mu))).max()
        assert err <= 2 * eps * A + 1e-12


def test_msp_bound_values():
    p = MSPBoundParams(sigma_max_sq=1.0, coeff_bound=1.0, dims=100, sample_sizes=(10_000, 10_000))
    # 100 * (1e-4 + 1e-4) / 0.25
    assert msp_bound(p, 0.5).mean_deviation == pytest.approx(0.08, rel=1e-12)
    assert msp_bound(p, 0.5).distance_distortion == pytest.approx(0.32, rel=1e-12)
    assert msp_bound(p, 1e9).mean_deviation < 1e-12
    assert msp_bound(p, 1e-3).mean_deviation == 1.0
    double = MSPBoundParams(1.0, 1.0, 100, (20_000, 20_000))
    assert msp_bound(double, 2.0).mean_deviation == pytest.approx(
        msp_bound(p, 2.0).mean_deviation / 2, rel=1e-12)
    with pytest.raises(ValueError):
        msp_bound(p, 0.0)
    with pytest.raises(ValueError):
        MSPBoundParams(0.0, 1.0, 1, (1,))


def test_operation_count_linear():
    assert operation_count(10, [100, 200, 300]) == 10 * 600 + 2 * 10 * 2
    assert operation_count(20, [200, 400]) == 2 * operation_count(10, [200, 400])

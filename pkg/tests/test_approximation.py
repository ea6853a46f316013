import math

import numpy as np
import pytest
from conftest import random_instance
from scipy.linalg import svdvals

from nystromopt import (
    SquaredExponentialKernel,
    approximation_factors,
    nystrom_diag,
    nystrom_factor,
    nystrom_from_columns,
    nystrom_matrix,
    nystrom_trace_error,
    optimal_rank_n,
    residual_norms,
)

E1 = math.exp(-1)
E2 = math.exp(-2)


class TestNystromMatrix:
    def test_full_sample_recovers_kernel_matrix(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(15, 2))
        ker = SquaredExponentialKernel(1.0)
        np.testing.assert_allclose(nystrom_matrix(X, X, ker), ker.k_cross(X, X), atol=1e-8)

    def test_two_point_closed_form(self):
        ker = SquaredExponentialKernel(1.0)
        K_hat = nystrom_matrix([[0.0], [1.0]], [[0.0]], ker)
        np.testing.assert_allclose(K_hat, [[1.0, E1], [E1, E2]], rtol=1e-14)

    def test_duplicated_landmark_matches_single(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(10, 2))
        ker = SquaredExponentialKernel(0.8)
        S = np.array([[0.2, -0.1]])
        a = nystrom_matrix(X, S, ker)
        b = nystrom_matrix(X, np.vstack([S, S]), ker)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_psd_and_rank_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            X, S, ker = random_instance(rng, N_max=40, n_max=6)
            K_hat = nystrom_matrix(X, S, ker)
            eig = np.linalg.eigvalsh(K_hat)
            assert eig[0] >= -1e-10 * max(eig[-1], 1.0)
            rank = int(np.sum(eig > 1e-8 * eig[-1]))
            assert rank <= S.shape[0]

    def test_residual_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            X, S, ker = random_instance(rng, N_max=40, n_max=6)
            K = ker.k_cross(X, X)
            resid = K - nystrom_matrix(X, S, ker)
            eig = np.linalg.eigvalsh(resid)
            assert eig[0] >= -1e-8 * np.linalg.eigvalsh(K)[-1]

    def test_factor_consistency(self):
        rng = np.random.default_rng(4)
        X, S, ker = random_instance(rng)
        B, rank = nystrom_factor(X, S, ker)
        np.testing.assert_allclose(B @ B.T, nystrom_matrix(X, S, ker), atol=1e-12)
        assert 1 <= rank <= S.shape[0]

    def test_diag_matches_dense(self):
        rng = np.random.default_rng(5)
        X, S, ker = random_instance(rng)
        np.testing.assert_allclose(
            nystrom_diag(X, S, ker), np.diag(nystrom_matrix(X, S, ker)), rtol=1e-12
        )


class TestNystromFromColumns:
    def test_all_columns_recover_kernel_matrix(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(12, 3))
        ker = SquaredExponentialKernel(0.7)
        K_hat = nystrom_from_columns(X, np.arange(12), ker)
        np.testing.assert_allclose(K_hat, ker.k_cross(X, X), atol=1e-8)

    def test_single_column_rank_one(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(9, 2))
        ker = SquaredExponentialKernel(1.3)
        i = 4
        K = ker.k_cross(X, X)
        expected = np.outer(K[:, i], K[:, i]) / K[i, i]
        np.testing.assert_allclose(nystrom_from_columns(X, [i], ker), expected, rtol=1e-12)

    def test_matches_landmark_construction(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(20, 2))
        ker = SquaredExponentialKernel(0.9)
        idx = np.array([3, 3, 11, 17])  # multiset: repeated column allowed
        a = nystrom_from_columns(X, idx, ker)
        b = nystrom_matrix(X, X[idx], ker)
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_index_out_of_range(self):
        ker = SquaredExponentialKernel(1.0)
        with pytest.raises(ValueError, match="out of range"):
            nystrom_from_columns(np.zeros((3, 1)), [3], ker)


class TestResidualNorms:
    def test_exact_approximation_gives_zeros(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(8, 2))
        ker = SquaredExponentialKernel(1.0)
        K = ker.k_cross(X, X)
        tr, fr, sp = residual_norms(X, K, ker)
        assert max(abs(tr), fr, sp) <= 1e-10

    def test_two_point_closed_form(self):
        ker = SquaredExponentialKernel(1.0)
        X = [[0.0], [1.0]]
        tr, fr, sp = residual_norms(X, nystrom_matrix(X, [[0.0]], ker), ker)
        np.testing.assert_allclose([tr, fr, sp], 1 - E2, rtol=1e-12)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            X, S, ker = random_instance(rng, N_max=40)
            resid = ker.k_cross(X, X) - nystrom_matrix(X, S, ker)
            sv = svdvals(resid)
            tr, fr, sp = residual_norms(X, nystrom_matrix(X, S, ker), ker)
            np.testing.assert_allclose(tr, sv.sum(), atol=1e-8)
            np.testing.assert_allclose(fr, np.sqrt((sv**2).sum()), atol=1e-8)
            np.testing.assert_allclose(sp, sv[0], atol=1e-8)

    def test_integrity_check_rejects_non_nystrom(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(10, 2))
        ker = SquaredExponentialKernel(1.0)
        K = ker.k_cross(X, X)
        bad = K + 0.5 * np.eye(10)  # residual is -0.5 I, clearly not PSD
        with pytest.raises(ValueError, match="not a Nystrom"):
            residual_norms(X, bad, ker)

    def test_shape_validation(self):
        ker = SquaredExponentialKernel(1.0)
        with pytest.raises(ValueError, match="approx"):
            residual_norms(np.zeros((3, 1)), np.zeros((2, 2)), ker)


class TestOptimalRankN:
    def test_full_rank_gives_zeros(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(7, 2))
        ker = SquaredExponentialKernel(1.0)
        assert optimal_rank_n(X, 7, ker) == (0.0, 0.0, 0.0)

    def test_two_point_closed_form(self):
        # eigenvalues 1 +- e^{-1}; rank-1 residual in every norm is 1 - e^{-1}
        ker = SquaredExponentialKernel(1.0)
        tr, fr, sp = optimal_rank_n([[0.0], [1.0]], 1, ker)
        np.testing.assert_allclose([tr, fr, sp], 1 - E1, rtol=1e-12)

    def test_matches_truncation_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            X, S, ker = random_instance(rng, N_max=30)
            n = S.shape[0]
            K = ker.k_cross(X, X)
            lam, U = np.linalg.eigh(K)
            K_n = (U[:, -n:] * lam[-n:]) @ U[:, -n:].T
            sv = svdvals(K - K_n)
            tr, fr, sp = optimal_rank_n(X, n, ker)
            np.testing.assert_allclose(tr, sv.sum(), atol=1e-9)
            np.testing.assert_allclose(fr, np.sqrt((sv**2).sum()), atol=1e-9)
            np.testing.assert_allclose(sp, sv[0], atol=1e-9)

    def test_n_validation(self):
        ker = SquaredExponentialKernel(1.0)
        with pytest.raises(ValueError):
            optimal_rank_n(np.zeros((3, 1)), 4, ker)


class TestApproximationFactors:
    def test_full_sample_factors_are_one(self):
        rng = np.random.default_rng(14)
        X = rng.normal(size=(10, 2))
        ker = SquaredExponentialKernel(1.0)
        rep = approximation_factors(X, X, ker)
        assert (rep.factor_tr, rep.factor_f, rep.factor_sp) == (1.0, 1.0, 1.0)

    def test_two_point_trace_factor(self):
        ker = SquaredExponentialKernel(1.0)
        rep = approximation_factors([[0.0], [1.0]], [[0.0]], ker)
        np.testing.assert_allclose(rep.factor_tr, 1 + E1, rtol=1e-12)
        np.testing.assert_allclose(rep.factor_f, 1 + E1, rtol=1e-12)
        np.testing.assert_allclose(rep.factor_sp, 1 + E1, rtol=1e-12)

    def test_factors_at_least_one(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            X, S, ker = random_instance(rng, N_max=40, n_max=6, rho_min=0.5)
            rep = approximation_factors(X, S, ker)
            assert rep.factor_tr >= 1 - 1e-8
            assert rep.factor_f >= 1 - 1e-8
            assert rep.factor_sp >= 1 - 1e-8

    def test_matches_residual_norms_route(self):
        rng = np.random.default_rng(16)
        X, S, ker = random_instance(rng, N_max=40)
        rep = approximation_factors(X, S, ker)
        tr, fr, sp = residual_norms(X, nystrom_matrix(X, S, ker), ker)
        np.testing.assert_allclose([rep.trace_err, rep.frob_err, rep.spec_err], [tr, fr, sp],
                                   rtol=1e-10, atol=1e-12)

    def test_rank_used_with_duplicates(self):
        rng = np.random.default_rng(17)
        X = rng.normal(size=(10, 2))
        ker = SquaredExponentialKernel(1.0)
        S = np.vstack([X[:2], X[:2]])  # 4 landmarks, rank 2
        rep = approximation_factors(X, S, ker)
        assert rep.rank_used == 2

    def test_trace_error_diagonal_path(self):
        rng = np.random.default_rng(18)
        X, S, ker = random_instance(rng)
        dense = float(np.trace(ker.k_cross(X, X) - nystrom_matrix(X, S, ker)))
        np.testing.assert_allclose(nystrom_trace_error(X, S, ker), dense, rtol=1e-10, atol=1e-12)


class TestLargeInstancePath:
    """Above the dense cutoff the factored route must agree with dense algebra."""

    def test_factored_norms_match_dense(self):
        rng = np.random.default_rng(19)
        N = 2100  # just past the dense-eigensolve cutoff
        X = rng.uniform(-1.5, 1.5, size=(N, 2))
        ker = SquaredExponentialKernel(1.0)
        S = X[rng.choice(N, 12, replace=False)] + 0.02 * rng.standard_normal((12, 2))
        K = ker.k_cross(X, X)
        lam = np.linalg.eigvalsh(K)
        rep = approximation_factors(X, S, ker, kernel_matrix=K, eigenvalues=lam)
        resid = K - nystrom_matrix(X, S, ker)
        np.testing.assert_allclose(rep.trace_err, np.trace(resid), rtol=1e-8)
        np.testing.assert_allclose(rep.frob_err, np.linalg.norm(resid, "fro"), rtol=1e-8)
        np.testing.assert_allclose(rep.spec_err, np.linalg.eigvalsh(resid)[-1], rtol=1e-6)
        assert rep.factor_tr >= 1 - 1e-8

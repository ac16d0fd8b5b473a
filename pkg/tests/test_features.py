import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effridge import (
    InvalidInputError,
    SeedPolicy,
    derive_stream_seed,
    empirical_kernel,
    sample_fourier_features,
    sample_gaussian_features,
)
from effridge.features import StreamSampler


class TestSeedDerivation:
    def test_deterministic(self):
        assert derive_stream_seed(7, 3) == derive_stream_seed(7, 3)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**64 - 1), st.integers(0, 10_000), st.integers(0, 10_000))
    def test_distinct_trials_distinct_streams(self, base, i, j):
        if i == j:
            return
        assert derive_stream_seed(base, i) != derive_stream_seed(base, j)

    def test_rejects_negative_trial(self):
        with pytest.raises(InvalidInputError):
            SeedPolicy(1, -1)

    def test_shifted(self):
        p = SeedPolicy(5, 2)
        assert p.shifted(3) == SeedPolicy(5, 5)


class TestStreamSampler:
    def test_golden_stream_values(self):
        # locks the published randomness stack (SplitMix64 -> Philox raw ->
        # 53-bit uniforms -> Box-Muller); these values must never change
        assert derive_stream_seed(0, 0) == 16294208416658607535
        assert derive_stream_seed(7, 3) == 10753165928301472203
        u = StreamSampler(SeedPolicy(0, 0)).uniform(3)
        assert u.tolist() == [0.25620661797964894, 0.3094821202847663, 0.4961865059303662]
        z = StreamSampler(SeedPolicy(0, 0)).normal(3)
        assert z.tolist() == [-0.7691841020129928, 0.5864130153756398, 0.018433863497830744]

    def test_uniform_range_and_determinism(self):
        u1 = StreamSampler(SeedPolicy(1, 0)).uniform(1000)
        u2 = StreamSampler(SeedPolicy(1, 0)).uniform(1000)
        assert np.array_equal(u1, u2)
        assert np.all((u1 >= 0) & (u1 < 1))

    def test_normal_moments(self):
        z = StreamSampler(SeedPolicy(2, 0)).normal(200_000)
        assert abs(np.mean(z)) < 0.01
        assert abs(np.std(z) - 1.0) < 0.01

    def test_normal_odd_count(self):
        z = StreamSampler(SeedPolicy(3, 0)).normal((3, 5))
        assert z.shape == (3, 5)


class TestGaussianFeatures:
    def test_shapes_and_split(self):
        root = np.eye(6)
        F = sample_gaussian_features(root, P=4, n_train=4, policy=SeedPolicy(0, 0))
        assert F.entries.shape == (6, 4)
        assert F.train.shape == (4, 4)
        assert F.test.shape == (2, 4)

    def test_rejects_zero_features(self):
        with pytest.raises(InvalidInputError):
            sample_gaussian_features(np.eye(2), P=0, n_train=1, policy=SeedPolicy(0, 0))

    def test_bit_identical_for_same_policy(self):
        root = np.eye(3)
        a = sample_gaussian_features(root, 5, 2, SeedPolicy(7, 3))
        b = sample_gaussian_features(root, 5, 2, SeedPolicy(7, 3))
        assert np.array_equal(a.entries, b.entries)

    def test_law_of_large_numbers_identity_gram(self):
        # with joint Gram = I, (1/P-normalized) F F^T estimates the identity
        M, P = 5, 100_000
        F = sample_gaussian_features(np.eye(M), P, M, SeedPolicy(11, 0))
        est = empirical_kernel(F)
        assert np.max(np.abs(est - np.eye(M))) < 0.02

    def test_covariance_matches_target_gram(self):
        # E[F F^T] = K for a non-trivial square root
        K = np.array([[1.0, 0.6], [0.6, 1.0]])
        w, V = np.linalg.eigh(K)
        root = (V * np.sqrt(w)) @ V.T
        F = sample_gaussian_features(root, 200_000, 2, SeedPolicy(12, 0))
        assert np.max(np.abs(empirical_kernel(F) - K)) < 0.02

    def test_entry_means_vanish_over_trials(self):
        # centered features: per-entry averages across trials go to zero
        trials = 900
        acc = np.zeros((3, 2))
        for t in range(trials):
            acc += sample_gaussian_features(np.eye(3), 2, 3, SeedPolicy(13, t)).entries
        acc /= trials
        # entry std is 1/sqrt(P) = 0.71, so the mean carries 3/sqrt(trials) error
        assert np.max(np.abs(acc)) < 3.0 / np.sqrt(trials)

    def test_entry_pair_covariance_matches_gram(self):
        # across trials, P * Cov(entry (i,a), entry (j,a)) = K_ij
        K = np.array([[1.0, 0.4], [0.4, 1.0]])
        w, V = np.linalg.eigh(K)
        root = (V * np.sqrt(w)) @ V.T
        trials, P = 2000, 3
        draws = np.array(
            [sample_gaussian_features(root, P, 2, SeedPolicy(14, t)).entries for t in range(trials)]
        )
        same_col = draws[:, :, 0]  # entries (0, 0) and (1, 0) across trials
        cov = np.cov(same_col.T, ddof=1) * P
        assert np.max(np.abs(cov - K)) < 3.0 / np.sqrt(trials) * P


class TestFourierFeatures:
    def test_amplitude_bound(self):
        X = np.linspace(0, 5, 20)[:, None]
        F = sample_fourier_features(X, lengthscale=2.0, P=64, policy=SeedPolicy(0, 0))
        # raw feature values are sqrt(2) cos(.) before the 1/sqrt(P) aggregate scale
        raw = F.entries * np.sqrt(F.n_features)
        assert np.all(np.abs(raw) <= np.sqrt(2.0) + 1e-12)

    def test_same_point_kernel_estimate(self):
        X = np.array([[0.7]])
        F = sample_fourier_features(X, lengthscale=2.0, P=100_000, policy=SeedPolicy(1, 0))
        est = empirical_kernel(F)[0, 0]
        assert est == pytest.approx(1.0, abs=0.02)

    def test_unit_separation_matches_rbf(self):
        # d=1, lengthscale 2, |x - x'| = 1: kernel exp(-1/2)
        X = np.array([[0.0], [1.0]])
        F = sample_fourier_features(X, lengthscale=2.0, P=100_000, policy=SeedPolicy(2, 0))
        est = empirical_kernel(F)[0, 1]
        assert est == pytest.approx(np.exp(-0.5), abs=0.02)

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidInputError):
            sample_fourier_features(np.zeros((2, 1)), lengthscale=0.0, P=3, policy=SeedPolicy(0, 0))
        with pytest.raises(InvalidInputError):
            sample_fourier_features(np.zeros((2, 1)), lengthscale=1.0, P=0, policy=SeedPolicy(0, 0))

    def test_deterministic(self):
        X = np.linspace(0, 1, 4)[:, None]
        a = sample_fourier_features(X, 1.0, 7, SeedPolicy(9, 4))
        b = sample_fourier_features(X, 1.0, 7, SeedPolicy(9, 4))
        assert np.array_equal(a.entries, b.entries)

    def test_convergence_rate(self):
        # entrywise error to the RBF kernel shrinks about like P^{-1/2}
        rng = np.random.default_rng(5)
        X = rng.normal(size=(8, 2))
        Kd = np.exp(-((X[:, None, :] - X[None, :, :]) ** 2).sum(-1) / 2.0)
        errs = []
        for P in (100, 1000, 10_000):
            F = sample_fourier_features(X, 2.0, P, SeedPolicy(3, 0))
            errs.append(np.max(np.abs(empirical_kernel(F) - Kd)))
        slope = np.polyfit(np.log([100, 1000, 10_000]), np.log(errs), 1)[0]
        assert -0.9 < slope < -0.2


class TestEmpiricalKernel:
    def test_rank_one(self):
        from effridge.features import FeatureMatrix

        v = np.array([[1.0], [2.0], [-0.5]])
        F = FeatureMatrix(entries=v, n_train=3, seed=0)
        assert np.allclose(empirical_kernel(F), v @ v.T)

    def test_symmetric_psd(self):
        F = sample_gaussian_features(np.eye(4), 6, 4, SeedPolicy(4, 0))
        G = empirical_kernel(F)
        assert np.array_equal(G, G.T)
        assert np.min(np.linalg.eigvalsh(G)) > -1e-12

    def test_gaussian_rate_fit(self):
        # max-abs error to the target Gram decreases about like P^{-1/2}
        rng = np.random.default_rng(6)
        A = rng.normal(size=(8, 8))
        K = A @ A.T / 8 + np.eye(8)
        w, V = np.linalg.eigh(K)
        root = (V * np.sqrt(w)) @ V.T
        errs = []
        for P in (100, 1000, 10_000):
            F = sample_gaussian_features(root, P, 8, SeedPolicy(8, 0))
            errs.append(np.max(np.abs(empirical_kernel(F) - K)))
        slope = np.polyfit(np.log([100, 1000, 10_000]), np.log(errs), 1)[0]
        assert -0.9 < slope < -0.2

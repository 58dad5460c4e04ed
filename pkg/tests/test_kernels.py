import numpy as np
import pytest

from hilbertconformal.errors import FitError, MismatchError
from hilbertconformal.hilbert import euclidean_point, quantile_point
from hilbertconformal.kernels import (KernelSpec, cross_gram, eval_kernel,
                                      gaussian_kernel, gram, median_heuristic,
                                      median_pairwise_distance)


def cloud(rng, n, d=2):
    return [euclidean_point(rng.normal(size=d)) for _ in range(n)]


class TestEvalKernel:
    def test_self_evaluation_is_one(self):
        spec = gaussian_kernel(2.0, "euclidean")
        p = euclidean_point([1.0, -3.0])
        assert eval_kernel(spec, p, p) == 1.0

    def test_unit_distance_unit_bandwidth(self):
        spec = gaussian_kernel(1.0, "euclidean")
        assert eval_kernel(spec, euclidean_point([0.0]), euclidean_point([1.0])) == \
            pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_half_bandwidth_diagonal(self):
        # d^2 = 2, sigma * d^2 = 1
        spec = gaussian_kernel(0.5, "euclidean")
        v = eval_kernel(spec, euclidean_point([0.0, 0.0]), euclidean_point([1.0, 1.0]))
        assert v == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_bounded_by_one_and_positive(self):
        rng = np.random.default_rng(1)
        spec = gaussian_kernel(0.7, "euclidean")
        for _ in range(50):
            a, b = cloud(rng, 2)
            v = eval_kernel(spec, a, b)
            assert 0.0 < v <= 1.0
            assert (v == 1.0) == np.array_equal(a.values, b.values)

    def test_space_mismatch_raises(self):
        spec = gaussian_kernel(1.0, "quantile")
        with pytest.raises(MismatchError):
            eval_kernel(spec, euclidean_point([1.0]), euclidean_point([2.0]))

    def test_invalid_bandwidth(self):
        with pytest.raises(ValueError):
            KernelSpec("gaussian", 0.0, "euclidean")
        with pytest.raises(ValueError):
            KernelSpec("laplace", 1.0, "euclidean")


class TestGram:
    def test_identical_points_give_all_ones(self):
        pts = [euclidean_point([2.0, 2.0])] * 4
        k = gram(gaussian_kernel(1.0, "euclidean"), pts)
        assert np.array_equal(k, np.ones((4, 4)))

    def test_single_point(self):
        k = gram(gaussian_kernel(1.0, "euclidean"), [euclidean_point([5.0])])
        assert np.array_equal(k, [[1.0]])

    def test_unit_diagonal_and_symmetry(self):
        rng = np.random.default_rng(2)
        k = gram(gaussian_kernel(0.5, "euclidean"), cloud(rng, 15))
        assert np.array_equal(np.diag(k), np.ones(15))
        assert np.array_equal(k, k.T)

    def test_psd_up_to_tolerance(self):
        # eigendecomposition oracle on a random 20-point cloud
        rng = np.random.default_rng(3)
        k = gram(gaussian_kernel(1.3, "euclidean"), cloud(rng, 20))
        assert np.linalg.eigvalsh(k).min() >= -1e-8

    def test_permutation_conjugation(self):
        rng = np.random.default_rng(4)
        pts = cloud(rng, 8)
        perm = rng.permutation(8)
        k = gram(gaussian_kernel(1.0, "euclidean"), pts)
        kp = gram(gaussian_kernel(1.0, "euclidean"), [pts[i] for i in perm])
        assert np.allclose(kp, k[np.ix_(perm, perm)], atol=1e-15)


class TestCrossGram:
    def test_indicator_at_matching_point(self):
        rng = np.random.default_rng(5)
        pts = cloud(rng, 6)
        v = cross_gram(gaussian_kernel(1.0, "euclidean"), pts, pts[3])
        assert v[3] == 1.0
        assert np.all(v[np.arange(6) != 3] < 1.0)

    def test_far_query_decays(self):
        spec = gaussian_kernel(0.5, "euclidean")
        pts = [euclidean_point([0.0]), euclidean_point([1.0])]
        v = cross_gram(spec, pts, euclidean_point([12.0]))  # sigma*d^2 >= 50 each
        assert np.all(v <= 2e-22)

    def test_matches_gram_column(self):
        rng = np.random.default_rng(6)
        pts = cloud(rng, 10)
        spec = gaussian_kernel(0.8, "euclidean")
        k = gram(spec, pts)
        v = cross_gram(spec, pts, pts[4])
        assert np.allclose(v, k[:, 4], atol=1e-12)

    def test_quantile_kernel_depends_only_on_values(self):
        spec = gaussian_kernel(1.0, "quantile")
        a = quantile_point([0.0, 1.0, 2.0])
        b = quantile_point([0.5, 1.0, 1.5])
        assert eval_kernel(spec, a, b) == eval_kernel(spec, a, b)
        # same stored values always give the same kernel, whatever produced them
        assert eval_kernel(spec, quantile_point(a.values.copy()), b) == \
            eval_kernel(spec, a, b)


class TestMedianHeuristic:
    def test_single_pair(self):
        sigma = median_heuristic([euclidean_point([0.0]), euclidean_point([2.0])])
        assert sigma == pytest.approx(0.25, abs=1e-14)

    def test_three_point_enumeration(self):
        # pairwise d^2 = {1, 4, 9}, median 4
        pts = [euclidean_point([0.0]), euclidean_point([1.0]), euclidean_point([3.0])]
        assert median_heuristic(pts) == pytest.approx(0.25, abs=1e-14)

    def test_duplicated_cloud_keeps_zero_pairs(self):
        # pairs of {a,a,b,b}: d^2 in {0, 1, 1, 1, 1, 0}; median stays positive
        pts = [euclidean_point([0.0])] * 2 + [euclidean_point([1.0])] * 2
        assert median_heuristic(pts) == pytest.approx(1.0, abs=1e-14)

    def test_degenerate_sample_raises(self):
        pts = [euclidean_point([3.0])] * 4
        with pytest.raises(FitError):
            median_heuristic(pts)

    def test_median_pairwise_distance(self):
        pts = [euclidean_point([0.0]), euclidean_point([1.0]), euclidean_point([3.0])]
        assert median_pairwise_distance(pts) == pytest.approx(2.0, abs=1e-14)

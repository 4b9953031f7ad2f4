import itertools

import numpy as np
import pytest

from kquantiles import adjusted_rand_index, kmeans_fit


class TestKMeans:
    def test_single_cluster_centroid_is_mean(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(25, 3))
        result = kmeans_fit(data, 1, restarts=3, seed=0)
        np.testing.assert_allclose(result.centroids[0], data.mean(axis=0))
        expected = float(np.sum((data - data.mean(axis=0)) ** 2))
        assert result.within_ss == pytest.approx(expected)

    def test_perfect_split(self):
        data = np.vstack([np.random.default_rng(1).normal(0, 0.1, (10, 2)),
                          np.random.default_rng(2).normal(8, 0.1, (10, 2))])
        truth = [1] * 10 + [2] * 10
        result = kmeans_fit(data, 2, restarts=10, seed=3)
        assert adjusted_rand_index(result.labels, truth) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_exhaustive_partition_oracle(self, seed):
        rng = np.random.default_rng(seed)
        data = rng.normal(size=(8, 2))
        best = np.inf
        for pattern in itertools.product((0, 1), repeat=8):
            labels = np.array(pattern)
            if labels.min() == labels.max():
                continue
            wss = 0.0
            for j in (0, 1):
                members = data[labels == j]
                wss += np.sum((members - members.mean(axis=0)) ** 2)
            best = min(best, wss)
        result = kmeans_fit(data, 2, restarts=50, seed=seed)
        assert result.within_ss == pytest.approx(best, rel=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        data = rng.normal(size=(40, 2))
        a = kmeans_fit(data, 3, restarts=5, seed=11)
        b = kmeans_fit(data, 3, restarts=5, seed=11)
        np.testing.assert_array_equal(a.labels, b.labels)
        assert a.within_ss == b.within_ss

    def test_labels_are_one_based_and_cover_data(self):
        rng = np.random.default_rng(9)
        data = rng.normal(size=(30, 2))
        result = kmeans_fit(data, 4, restarts=5, seed=0)
        assert result.labels.shape == (30,)
        assert result.labels.min() >= 1
        assert result.labels.max() <= 4

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="fewer points than clusters"):
            kmeans_fit(np.zeros((2, 1)), 3)

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            kmeans_fit(np.zeros((5, 1)), 0)

    def test_accepts_dataset_like(self):
        class Box:
            values = np.arange(10.0).reshape(-1, 1)

        result = kmeans_fit(Box(), 2, restarts=5, seed=0)
        assert result.within_ss < np.sum(
            (Box.values - Box.values.mean()) ** 2)

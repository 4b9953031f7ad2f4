import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kquantiles import ContingencyTable, adjusted_rand_index

labelings = st.lists(st.integers(min_value=0, max_value=4), min_size=2,
                     max_size=40)


class TestContingencyTable:
    def test_counts_and_marginals(self):
        table = ContingencyTable.from_labels([1, 1, 2, 2], [1, 2, 1, 2])
        np.testing.assert_array_equal(table.counts, [[1, 1], [1, 1]])
        np.testing.assert_array_equal(table.row_marginals, [2, 2])
        np.testing.assert_array_equal(table.column_marginals, [2, 2])

    def test_total_is_n(self):
        table = ContingencyTable.from_labels([0, 0, 1, 5, 5], [3, 3, 3, 1, 2])
        assert table.counts.sum() == 5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ContingencyTable.from_labels([1, 2], [1, 2, 3])


class TestAdjustedRandIndex:
    def test_identical_labelings(self):
        assert adjusted_rand_index([1, 1, 2, 2, 3], [1, 1, 2, 2, 3]) == 1.0

    def test_relabeling_is_perfect(self):
        assert adjusted_rand_index([1, 1, 2, 2], [7, 7, 3, 3]) == 1.0

    def test_crossed_pairs(self):
        # hand oracle: all pair agreements cancel exactly to -1/2
        assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5)

    def test_single_cluster_vs_singletons_scores_zero(self):
        assert adjusted_rand_index([1, 1, 1], [1, 2, 3]) == 0.0

    def test_two_trivial_partitions(self):
        # index equals both bounds; the degenerate 0/0 is defined as 1
        assert adjusted_rand_index([1, 1, 1], [2, 2, 2]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([1, 2], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([1], [1])

    @given(labelings)
    @settings(max_examples=80)
    def test_symmetric(self, labels):
        other = labels[::-1]
        assert adjusted_rand_index(labels, other) == pytest.approx(
            adjusted_rand_index(other, labels))

    @given(labelings)
    @settings(max_examples=80)
    def test_self_agreement(self, labels):
        assert adjusted_rand_index(labels, labels) == 1.0

    @given(labelings, st.permutations(list(range(5))))
    @settings(max_examples=80)
    def test_invariant_under_relabeling(self, labels, perm):
        renamed = [perm[v] for v in labels]
        assert adjusted_rand_index(labels, renamed) == 1.0

    @given(labelings)
    @settings(max_examples=80)
    def test_bounded(self, labels):
        value = adjusted_rand_index(labels, labels[::-1])
        assert -1.0 <= value <= 1.0

    def test_null_distribution_mean_near_zero(self):
        rng = np.random.default_rng(0)
        values = [adjusted_rand_index(rng.integers(1, 4, 100),
                                      rng.integers(1, 4, 100))
                  for _ in range(1000)]
        assert abs(np.mean(values)) < 0.02

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 30))
            a = rng.integers(0, 4, n)
            b = rng.integers(0, 3, n)
            same_a = a[:, None] == a[None, :]
            same_b = b[:, None] == b[None, :]
            iu = np.triu_indices(n, 1)
            n11 = np.sum(same_a[iu] & same_b[iu])
            n00 = np.sum(~same_a[iu] & ~same_b[iu])
            n10 = np.sum(same_a[iu] & ~same_b[iu])
            n01 = np.sum(~same_a[iu] & same_b[iu])
            total = n * (n - 1) // 2
            expected = ((n11 + n10) * (n11 + n01) + (n00 + n10) * (n00 + n01)) / total
            denom = total - expected
            oracle = 1.0 if denom == 0 else (n11 + n00 - expected) / denom
            assert adjusted_rand_index(a, b) == pytest.approx(oracle, abs=1e-12)

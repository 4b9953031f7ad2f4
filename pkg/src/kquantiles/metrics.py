"""External cluster-recovery scoring."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or np.any(counts < 0):
            raise ValueError("counts must be a nonnegative 2-D matrix")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def column_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_labels(cls, labels_a, labels_b) -> "ContingencyTable":
        labels_a = np.asarray(labels_a).ravel()
        labels_b = np.asarray(labels_b).ravel()
        if labels_a.shape != labels_b.shape:
            raise ValueError("label vectors must have equal length")
        _, ia = np.unique(labels_a, return_inverse=True)
        _, ib = np.unique(labels_b, return_inverse=True)
        counts = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
        np.add.at(counts, (ia, ib), 1)
        return cls(counts=counts)


def _pairs(x) -> int:
    # exact integer pair count, immune to overflow for any practical n
    total = 0
    for v in np.asarray(x).ravel().tolist():
        v = int(v)
        total += v * (v - 1) // 2
    return total


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Hubert-Arabie adjusted Rand index between two partitions."""
    labels_a = np.asarray(labels_a).ravel()
    labels_b = np.asarray(labels_b).ravel()
    if labels_a.shape != labels_b.shape:
        raise ValueError("label vectors must have equal length")
    if labels_a.size < 2:
        raise ValueError("need at least two observations")
    table = ContingencyTable.from_labels(labels_a, labels_b)
    n = table.total
    index = _pairs(table.counts)
    sum_a = _pairs(table.row_marginals)
    sum_b = _pairs(table.column_marginals)
    all_pairs = n * (n - 1) // 2
    expected = sum_a * sum_b
    max_index = (sum_a + sum_b) * all_pairs
    # ARI = (index - E) / (max - E), cleared of the C(n,2) denominator and
    # doubled to keep everything in exact integers; 0/0 (two trivial
    # partitions) is defined as 1
    numerator = 2 * (index * all_pairs - expected)
    denominator = max_index - 2 * expected
    if denominator == 0:
        return 1.0
    return numerator / denominator

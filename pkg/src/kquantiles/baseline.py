"""Reference K-means (Lloyd) used for benchmark comparison."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    within_ss: float


def _within_ss(values, centroids, labels):
    diff = values - centroids[labels - 1]
    return float(np.sum(diff * diff))


def _lloyd(values, k, max_iter, rng):
    n = values.shape[0]
    start = rng.choice(n, size=k, replace=False)
    centroids = values[start].copy()
    labels = None

    def distances(cents):
        d2 = np.empty((n, k))
        for j in range(k):
            diff = values - cents[j]
            d2[:, j] = np.einsum("ij,ij->i", diff, diff)
        return d2

    for _ in range(max_iter):
        d2 = distances(centroids)
        new_labels = np.argmin(d2, axis=1) + 1
        sizes = np.bincount(new_labels - 1, minlength=k)
        for j in np.flatnonzero(sizes == 0):
            # reseed an empty cluster at the point farthest from its centroid
            dist = d2[np.arange(n), new_labels - 1]
            worst = int(np.argmax(dist))
            centroids[j] = values[worst]
            d2[:, j] = np.sum((values - centroids[j]) ** 2, axis=1)
            new_labels = np.argmin(d2, axis=1) + 1
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = values[labels == j + 1]
            if members.shape[0] > 0:
                centroids[j] = members.mean(axis=0)
    return centroids, labels


def kmeans_fit(data, k: int, restarts: int = 30, max_iter: int = 1000,
               seed: int = 0) -> KMeansResult:
    """Multi-restart Lloyd's algorithm; deterministic per seed."""
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if values.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    if values.shape[0] < k:
        raise ValueError("fewer points than clusters")
    if k < 1 or restarts < 1:
        raise ValueError("k and restarts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for child in children:
        rng = np.random.default_rng(child)
        centroids, labels = _lloyd(values, k, max_iter, rng)
        wss = _within_ss(values, centroids, labels)
        if best is None or wss < best.within_ss:
            best = KMeansResult(centroids=centroids.copy(), labels=labels.copy(),
                                within_ss=wss)
    return best

"""Geodesic c-means: hard clustering by geodesic distance with on-manifold centroids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset


@dataclass(frozen=True)
class ClusterResult:
    centroid_indices: np.ndarray
    assignment: np.ndarray
    iterations_run: int

    @property
    def n_clusters(self) -> int:
        return len(self.centroid_indices)

    def centroids(self, dataset: Dataset) -> np.ndarray:
        return dataset.points[self.centroid_indices]


def default_n_clusters(n: int, floor: int = 1) -> int:
    return min(max(int(round(0.01 * n)), 2, floor), n)


def _assign(gd: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, i.e. lowest cluster id on ties
    return np.argmin(gd[:, centroids], axis=1)


def gcm_cluster(dataset: Dataset, geodesics: np.ndarray, n_c: int,
                max_iter: int = 100, seed: int = 0) -> ClusterResult:
    """Cluster with geodesic assignments; each centroid snaps to the data point
    Euclidean-nearest to its cluster mean.

    Stops early once the assignment vector repeats. An empty cluster is
    re-seeded with the point farthest (geodesically) from its own centroid.
    """
    x = dataset.points
    n = x.shape[0]
    gd = np.asarray(geodesics, dtype=float)
    if gd.shape != (n, n):
        raise ValueError(f"geodesic matrix shape {gd.shape} does not match n={n}")
    if int(n_c) != n_c or not 2 <= n_c <= n:
        raise ValueError(f"n_c must be an integer in [2, {n}], got {n_c}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = np.sort(rng.choice(n, size=int(n_c), replace=False))
    assignment = _assign(gd, centroids)
    it = 0
    while it < max_iter:
        it += 1
        new_centroids = centroids.copy()
        taken = set()
        for k in range(n_c):
            members = np.flatnonzero(assignment == k)
            if members.size == 0:
                continue
            mean = x[members].mean(axis=0)
            d = cdist(mean[None, :], x)[0]
            new_centroids[k] = int(np.argmin(d))
        # two clusters may snap to the same point; keep the first, re-seed others
        for k in range(n_c):
            members = np.flatnonzero(assignment == k)
            if members.size == 0 or new_centroids[k] in taken:
                new_centroids[k] = _reseed(gd, new_centroids, assignment, taken)
            taken.add(int(new_centroids[k]))
        centroids = new_centroids
        new_assignment = _assign(gd, centroids)
        if np.array_equal(new_assignment, assignment):
            assignment = new_assignment
            break
        assignment = new_assignment
    # leave no centroid without members at termination
    for _ in range(n_c):
        counts = np.bincount(assignment, minlength=n_c)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        k = int(empty[0])
        taken = set(int(c) for j, c in enumerate(centroids) if j != k)
        centroids[k] = _reseed(gd, centroids, assignment, taken)
        assignment = _assign(gd, centroids)
    return ClusterResult(centroids.astype(np.int64), assignment.astype(np.int64), it)


def _reseed(gd, centroids, assignment, taken) -> int:
    own = gd[np.arange(gd.shape[0]), centroids[assignment]]
    order = np.argsort(-own, kind="stable")
    for i in order:
        if int(i) not in taken:
            return int(i)
    raise RuntimeError("no free point available to re-seed an empty cluster")

"""Euclidean kNN neighbourhood graph and shortest-path geodesic estimates."""
from __future__ import annotations

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, dijkstra
from scipy.spatial.distance import cdist

from .data import Dataset

log = logging.getLogger(__name__)

FLOYD_WARSHALL_MAX_N = 512
GDM_MAGIC = b"GDM1"


class DisconnectedGraphError(RuntimeError):
    def __init__(self, report: "ComponentReport"):
        self.report = report
        sizes = ", ".join(str(s) for s in report.sizes)
        super().__init__(
            f"neighbourhood graph has {report.n_components} connected components "
            f"(sizes: {sizes}); increase epsilon")


@dataclass(frozen=True)
class NeighborGraph:
    n: int
    epsilon: int
    weights: np.ndarray          # dense n x n, inf where no edge
    has_duplicates: bool = False

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        row = self.weights[i]
        idx = np.flatnonzero(np.isfinite(row))
        return [(int(j), float(row[j])) for j in idx if j != i]

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        return [self.neighbors(i) for i in range(self.n)]

    def degree(self) -> np.ndarray:
        finite = np.isfinite(self.weights)
        np.fill_diagonal(finite, False)
        return finite.sum(axis=1)

    def edge_mask(self) -> np.ndarray:
        mask = np.isfinite(self.weights)
        np.fill_diagonal(mask, False)
        return mask


@dataclass(frozen=True)
class ComponentReport:
    components: tuple[tuple[int, ...], ...]

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    @property
    def connected(self) -> bool:
        return len(self.components) == 1


def default_epsilon(n: int, floor: int = 1) -> int:
    """1% of the sample count, rounded, never below ``floor`` nor above n - 1."""
    eps = max(int(round(0.01 * n)), 1, floor)
    return min(eps, n - 1)


def build_knn_graph(dataset: Dataset | np.ndarray, epsilon: int) -> NeighborGraph:
    points = dataset.points if isinstance(dataset, Dataset) else np.asarray(dataset, float)
    n = points.shape[0]
    if n < 2:
        raise ValueError("need at least two points to build a graph")
    if int(epsilon) != epsilon or not 1 <= epsilon < n:
        raise ValueError(f"epsilon must be an integer in [1, {n - 1}], got {epsilon}")
    epsilon = int(epsilon)
    dist = cdist(points, points)
    ranking = dist.copy()
    np.fill_diagonal(ranking, np.inf)
    # stable sort breaks distance ties by lower index
    nearest = np.argsort(ranking, axis=1, kind="stable")[:, :epsilon]
    weights = np.full((n, n), np.inf)
    rows = np.repeat(np.arange(n), epsilon)
    cols = nearest.reshape(-1)
    weights[rows, cols] = dist[rows, cols]
    weights[cols, rows] = dist[rows, cols]
    np.fill_diagonal(weights, 0.0)
    off = ~np.eye(n, dtype=bool)
    dup = bool(np.any((weights == 0.0) & off))
    if dup:
        log.warning("duplicate points produce zero-weight edges")
    return NeighborGraph(n, epsilon, weights, dup)


def check_connectivity(graph: NeighborGraph) -> ComponentReport:
    csg = csgraph_from_dense(graph.weights, null_value=np.inf)
    _, labels = connected_components(csg, directed=False)
    comps = {}
    for i, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(i)
    ordered = sorted((tuple(c) for c in comps.values()), key=lambda c: c[0])
    return ComponentReport(tuple(ordered))


def floyd_warshall(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths, O(n^3), vectorized over the inner two loops."""
    dist = np.array(weights, dtype=float)
    np.fill_diagonal(dist, 0.0)
    for k in range(dist.shape[0]):
        np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :], out=dist)
    return dist


def _per_source(weights: np.ndarray, threads: int = 1) -> np.ndarray:
    csg = csgraph_from_dense(weights, null_value=np.inf)
    n = weights.shape[0]
    if threads <= 1 or n < 2 * threads:
        return dijkstra(csg, directed=False)
    out = np.empty((n, n))
    chunks = np.array_split(np.arange(n), threads)

    def run(idx):
        out[idx] = dijkstra(csg, directed=False, indices=idx)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(run, chunks))
    return out


def geodesic_all_pairs(graph: NeighborGraph, algorithm: str = "auto",
                       threads: int = 1) -> np.ndarray:
    """Shortest weighted path lengths between every pair of nodes.

    ``auto`` picks Floyd-Warshall up to 512 nodes, per-source Dijkstra above.
    """
    report = check_connectivity(graph)
    if not report.connected:
        raise DisconnectedGraphError(report)
    if algorithm == "auto":
        algorithm = "floyd_warshall" if graph.n <= FLOYD_WARSHALL_MAX_N else "per_source"
    if algorithm == "floyd_warshall":
        gd = floyd_warshall(graph.weights)
    elif algorithm == "per_source":
        gd = _per_source(graph.weights, threads)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    # exact symmetry; the two triangles can differ in the last ulp
    gd = np.minimum(gd, gd.T)
    np.fill_diagonal(gd, 0.0)
    return gd


def geodesic_distances(dataset: Dataset, epsilon: int, algorithm: str = "auto",
                       threads: int = 1) -> np.ndarray:
    return geodesic_all_pairs(build_knn_graph(dataset, epsilon), algorithm, threads)


def extend_geodesics(train_points: np.ndarray, train_gd: np.ndarray,
                     new_points: np.ndarray, n_anchors: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Estimate geodesics for unseen points by routing through training anchors.

    Each new point is linked to its ``n_anchors`` Euclidean-nearest training
    points; a path from a new point enters the training graph at one of them.
    Returns (new x train, new x new) distance matrices.
    """
    train_points = np.asarray(train_points, float)
    new_points = np.asarray(new_points, float)
    n_anchors = int(min(max(n_anchors, 1), train_points.shape[0]))
    d_new_train = cdist(new_points, train_points)
    anchors = np.argsort(d_new_train, axis=1, kind="stable")[:, :n_anchors]
    m = new_points.shape[0]
    to_train = np.empty((m, train_points.shape[0]))
    for h in range(m):
        a = anchors[h]
        to_train[h] = np.min(d_new_train[h, a][:, None] + train_gd[a], axis=0)
    new_new = np.empty((m, m))
    for h in range(m):
        a = anchors[h]
        new_new[h] = np.min(d_new_train[h, a][:, None] + to_train[:, a].T, axis=0)
    new_new = np.minimum(new_new, new_new.T)
    np.fill_diagonal(new_new, 0.0)
    return to_train, new_new


def save_gdm(gd: np.ndarray, path) -> None:
    gd = np.ascontiguousarray(gd, dtype="<f8")
    n = gd.shape[0]
    with Path(path).open("wb") as fh:
        fh.write(GDM_MAGIC)
        fh.write(struct.pack("<Q", n))
        fh.write(gd.tobytes(order="C"))


def load_gdm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != GDM_MAGIC:
        raise ValueError(f"{path}: not a GDM1 geodesic cache file")
    (n,) = struct.unpack("<Q", raw[4:12])
    body = raw[12:]
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: truncated geodesic cache ({len(body)} bytes for n={n})")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)

"""Foundational numeric primitives.

Two-component PCA with reference points, exact neighbor graphs
(range and k-nearest), shortest paths, and connected components.
All functions are pure; neighbor searches are exact brute-force,
which is affordable and fully deterministic at desk scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse import csgraph as _csgraph

from .errors import AlgorithmFailure, DataFormatError

_EPS = 1e-12


@dataclass
class PointCloud:
    """n points in d-dimensional ambient space.

    ``points`` is an (n, d) float array; every coordinate must be finite.
    Most geometry operations accept d >= 1, PCA needs d >= 2.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DataFormatError("points must be a 2-D array of shape (n, d)")
        if pts.shape[1] < 1:
            raise DataFormatError("ambient dimension must be at least 1")
        if pts.size and not np.all(np.isfinite(pts)):
            raise DataFormatError("point coordinates must be finite")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def subset(self, indices) -> "PointCloud":
        return PointCloud(self.points[np.asarray(indices, dtype=int)])


@dataclass
class ReferenceFrame:
    """Data mean, two principal directions with spreads, and reference points.

    ``q1``/``q2`` sit at ``mu + v * sigma``; the slicing hyperplanes are
    orthogonal to the lines joining them through the mean.
    """

    mu: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    sigma1: float
    sigma2: float
    q1: np.ndarray = field(default=None)
    q2: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.v1 = np.asarray(self.v1, dtype=float)
        self.v2 = np.asarray(self.v2, dtype=float)
        for v in (self.v1, self.v2):
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise DataFormatError("principal directions must be unit vectors")
        if abs(float(self.v1 @ self.v2)) > 1e-10:
            raise DataFormatError("principal directions must be orthogonal")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise DataFormatError("spreads must be nonnegative")
        if self.q1 is None:
            self.q1 = self.mu + self.v1 * self.sigma1
        if self.q2 is None:
            self.q2 = self.mu + self.v2 * self.sigma2

    def direction(self, axis: int) -> np.ndarray:
        return self.v1 if axis == 1 else self.v2

    def spread(self, axis: int) -> float:
        return self.sigma1 if axis == 1 else self.sigma2


@dataclass
class WeightedGraph:
    """Edge-list graph with Euclidean-distance weights.

    Undirected graphs store each edge once with ``u < v``; directed graphs
    keep edges as given.  No self-loops, no duplicates, all weights > 0.
    """

    n_nodes: int
    edges: np.ndarray          # (m, 2) int node pairs
    weights: np.ndarray        # (m,) float
    directed: bool = False

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.edges.shape[0] != self.weights.shape[0]:
            raise DataFormatError("edge list and weight list differ in length")
        if self.edges.size:
            if np.any(self.edges[:, 0] == self.edges[:, 1]):
                raise DataFormatError("self-loops are not allowed")
            if np.any(self.weights <= 0):
                raise DataFormatError("edge weights must be positive")
            key = self.edges[:, 0] * self.n_nodes + self.edges[:, 1]
            if np.unique(key).size != key.size:
                raise DataFormatError("duplicate edges are not allowed")

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def to_csr(self) -> csr_matrix:
        """Sparse adjacency matrix; undirected graphs are symmetrized."""
        rows, cols, w = self.edges[:, 0], self.edges[:, 1], self.weights
        if not self.directed and self.n_edges:
            rows = np.concatenate([rows, cols])
            cols = np.concatenate([cols, self.edges[:, 0]])
            w = np.concatenate([w, w])
        return csr_matrix((w, (rows, cols)), shape=(self.n_nodes, self.n_nodes))


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip so the first component with magnitude above 1e-12 is positive."""
    for x in v:
        if abs(x) > _EPS:
            return v if x > 0 else -v
    return v


def pca2(cloud: PointCloud, spread: str = "half_extent") -> ReferenceFrame:
    """Two-component PCA of a point cloud.

    Parameters
    ----------
    cloud : PointCloud
        At least 3 points in dimension >= 2, not all identical.
    spread : str
        ``"half_extent"`` sets sigma_i to ``max_j |(y_j - mu)^T v_i|`` so
        the slab sequence covers the full data range; ``"std"`` uses the
        per-direction standard deviation instead.

    Returns
    -------
    ReferenceFrame
        Mean, top-two principal directions (deterministic signs, spectrum
        ties broken lexicographically), spreads and reference points.
    """
    if spread not in ("half_extent", "std"):
        raise DataFormatError(f"unknown spread semantics {spread!r}")
    if cloud.n < 3:
        raise DataFormatError("pca2 requires at least 3 points")
    if cloud.d < 2:
        raise DataFormatError("pca2 requires ambient dimension >= 2")
    mu = cloud.points.mean(axis=0)
    centered = cloud.points - mu
    # SVD of the centered data; the eigensolve of the covariance matrix is
    # kept as the independent test oracle.
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    scale = float(svals[0])
    if scale <= _EPS:
        raise AlgorithmFailure("no principal direction")
    if svals.size < 2 or svals[1] <= _EPS * scale:
        raise AlgorithmFailure("second principal direction undefined")
    v1 = _canonical_sign(vt[0])
    v2 = _canonical_sign(vt[1])
    if abs(svals[0] - svals[1]) <= _EPS * scale:
        # Degenerate spectrum: order the tied eigenvectors so the
        # lexicographically larger one comes first.
        if tuple(v2) > tuple(v1):
            v1, v2 = v2, v1
    if spread == "half_extent":
        sigma1 = float(np.max(np.abs(centered @ v1)))
        sigma2 = float(np.max(np.abs(centered @ v2)))
    else:
        sigma1 = float(svals[0] / np.sqrt(cloud.n))
        sigma2 = float(svals[1] / np.sqrt(cloud.n))
    return ReferenceFrame(mu=mu, v1=v1, v2=v2, sigma1=sigma1, sigma2=sigma2)


def pairwise_distances(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Dense Euclidean distance matrix between two point sets."""
    a = np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    sq = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def range_graph(cloud: PointCloud, radius: float) -> WeightedGraph:
    """Undirected graph with an edge wherever ``0 < dist <= radius``."""
    if radius <= 0:
        raise DataFormatError("radius must be positive")
    n = cloud.n
    if n < 2:
        return WeightedGraph(n, np.empty((0, 2), dtype=int), np.empty(0), directed=False)
    dist = pairwise_distances(cloud.points)
    iu, ju = np.triu_indices(n, k=1)
    w = dist[iu, ju]
    keep = (w > 0) & (w <= radius)
    return WeightedGraph(n, np.column_stack([iu[keep], ju[keep]]), w[keep], directed=False)


def knn_graph(cloud: PointCloud, k: int) -> WeightedGraph:
    """Directed graph with exactly k outgoing edges per node.

    Edges go to the k nearest distinct points; distance ties are broken
    by the lower point index.
    """
    n = cloud.n
    if k < 1:
        raise DataFormatError("k must be at least 1")
    if k >= n:
        raise DataFormatError("k too large")
    dist = pairwise_distances(cloud.points)
    # Stable sort keeps index order within ties; forcing the self column to
    # the front excludes it even when duplicate points sit at distance 0.
    np.fill_diagonal(dist, -1.0)
    order = np.argsort(dist, axis=1, kind="stable")
    neighbors = order[:, 1 : k + 1]
    rows = np.repeat(np.arange(n), k)
    cols = neighbors.reshape(-1)
    np.fill_diagonal(dist, 0.0)
    w = dist[rows, cols]
    return WeightedGraph(n, np.column_stack([rows, cols]), w, directed=True)


def dijkstra(graph: WeightedGraph, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Single-source shortest paths.

    Returns
    -------
    distances : (n,) float array
        Exact shortest-path lengths, ``inf`` for unreachable nodes.
    predecessors : (n,) int array
        Previous node on a shortest path, -1 for the source and for
        unreachable nodes.
    """
    if not 0 <= source < graph.n_nodes:
        raise DataFormatError("source node out of range")
    dist, pred = _csgraph.dijkstra(
        graph.to_csr(), directed=graph.directed, indices=source, return_predecessors=True
    )
    pred = np.where(pred < 0, -1, pred)
    return dist, pred


def dijkstra_all_pairs(graph: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Shortest paths from every node; (n, n) distance and predecessor arrays."""
    dist, pred = _csgraph.dijkstra(
        graph.to_csr(), directed=graph.directed, return_predecessors=True
    )
    pred = np.where(pred < 0, -1, pred)
    return dist, pred


def reconstruct_path(predecessors: np.ndarray, source: int, target: int) -> list[int]:
    """Node sequence from source to target out of a predecessor array."""
    path = [int(target)]
    while path[-1] != source:
        prev = int(predecessors[path[-1]])
        if prev < 0:
            raise AlgorithmFailure(f"node {target} unreachable from {source}")
        path.append(prev)
    path.reverse()
    return path


def connected_components(graph: WeightedGraph) -> np.ndarray:
    """Per-node component labels.

    Labels are 0-based, contiguous, and ordered by the smallest node
    index contained in each component.  Edge direction is ignored.
    """
    if graph.n_nodes == 0:
        return np.empty(0, dtype=int)
    _, raw = _csgraph.connected_components(graph.to_csr(), directed=False)
    order = {}
    labels = np.empty(graph.n_nodes, dtype=int)
    for node, lab in enumerate(raw):
        if lab not in order:
            order[lab] = len(order)
        labels[node] = order[lab]
    return labels

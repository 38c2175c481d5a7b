"""Minimal Isomap baseline.

Symmetrized kNN graph, all-pairs geodesic distances by Dijkstra, and
classical scaling of the double-centered squared distance matrix.  The
residual variance per candidate dimension is 1 minus the squared
Pearson correlation between geodesic and embedded distances.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph as _csgraph
from scipy.spatial.distance import pdist

from .errors import AlgorithmFailure, DataFormatError
from .geometry import PointCloud, knn_graph

logger = logging.getLogger(__name__)


@dataclass
class IsomapResult:
    """Embedding plus the residual-variance curve over dimensions."""

    embedding: np.ndarray             # (n_kept, dims)
    residual_variances: np.ndarray    # (dims,)
    eigenvalues: np.ndarray           # (dims,)
    kept_indices: np.ndarray = field(default=None)
    n_dropped: int = 0

    def __post_init__(self):
        if self.kept_indices is None:
            self.kept_indices = np.arange(self.embedding.shape[0])


def _geodesic_distances(cloud: PointCloud, k: int) -> tuple[np.ndarray, np.ndarray, int]:
    graph = knn_graph(cloud, k).to_csr()
    sym = graph.maximum(graph.T)
    n_comp, labels = _csgraph.connected_components(sym, directed=False)
    keep = np.arange(cloud.n)
    dropped = 0
    if n_comp > 1:
        largest = np.argmax(np.bincount(labels))
        keep = np.flatnonzero(labels == largest)
        dropped = cloud.n - keep.size
        logger.warning("kNN graph disconnected: dropping %d of %d points", dropped, cloud.n)
        sym = sym[keep][:, keep]
    dist = _csgraph.dijkstra(sym, directed=False)
    return dist, keep, dropped


def _classical_scaling(dist: np.ndarray, dims: int) -> tuple[np.ndarray, np.ndarray]:
    n = dist.shape[0]
    sq = dist ** 2
    row = sq.mean(axis=1)
    b = -0.5 * (sq - row[:, None] - row[None, :] + sq.mean())
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:dims]
    top = evals[order]
    coords = evecs[:, order] * np.sqrt(np.maximum(top, 0.0))[None, :]
    return coords, top


def isomap(cloud: PointCloud, k: int, dims: int = 2) -> IsomapResult:
    """Isomap embedding of a point cloud.

    Parameters
    ----------
    cloud : PointCloud
        Input points.
    k : int
        Neighbor count for the (symmetrized) kNN graph.  If the graph is
        disconnected only the largest component is embedded and the
        number of dropped points is recorded.
    dims : int
        Number of embedding dimensions to return (1 <= dims <= d).

    Returns
    -------
    IsomapResult
        Embedding columns ordered by decreasing eigenvalue, residual
        variance per candidate dimension, kept indices, dropped count.
    """
    if not 1 <= dims <= cloud.d:
        raise DataFormatError("dims must be between 1 and the ambient dimension")
    dist, keep, dropped = _geodesic_distances(cloud, k)
    if keep.size < dims + 1:
        raise AlgorithmFailure("not enough connected points for the embedding")
    coords, evals = _classical_scaling(dist, dims)

    iu = np.triu_indices(dist.shape[0], k=1)
    geo = dist[iu]
    residuals = np.empty(dims)
    for e in range(1, dims + 1):
        emb_dist = pdist(coords[:, :e])
        r = np.corrcoef(geo, emb_dist)[0, 1]
        residuals[e - 1] = 1.0 - r * r
    return IsomapResult(embedding=coords, residual_variances=residuals,
                        eigenvalues=evals, kept_indices=keep, n_dropped=dropped)

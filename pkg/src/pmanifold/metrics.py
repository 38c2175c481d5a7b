"""Embedding quality metrics.

The adjacency-distance error is the mean absolute difference between
the directed kNN distance matrices of the raw and the embedded data,
normalized by n*k.  Cross-correlation scoring compares embedding
components against a ground-truth signal with per-axis sign alignment,
and trend curves are fitted by least squares with the coefficient of
determination.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import AlgorithmFailure, DataFormatError
from .geometry import PointCloud, knn_graph


@dataclass
class AdjacencyDistance:
    """Sparse directed kNN distance matrix: exactly n*k positive entries."""

    n: int
    k: int
    rows: np.ndarray
    cols: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=int)
        self.cols = np.asarray(self.cols, dtype=int)
        self.distances = np.asarray(self.distances, dtype=float)
        if not (self.rows.size == self.cols.size == self.distances.size == self.n * self.k):
            raise DataFormatError("adjacency matrix must store exactly n*k entries")
        if np.any(self.distances <= 0):
            raise DataFormatError("adjacency distances must be positive")


@dataclass
class FitReport:
    """Fitted trend curve with its goodness of fit."""

    kind: str                 # linear | quadratic | exponential
    parameters: np.ndarray
    r_squared: float

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=float)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "parameters": self.parameters.tolist(),
                "r_squared": self.r_squared}


def adjacency_distance(cloud: PointCloud, k: int) -> AdjacencyDistance:
    """Directed kNN distance matrix of a point cloud."""
    graph = knn_graph(cloud, k)
    return AdjacencyDistance(n=cloud.n, k=k, rows=graph.edges[:, 0],
                             cols=graph.edges[:, 1], distances=graph.weights)


def delta(a: AdjacencyDistance, a_tilde: AdjacencyDistance) -> float:
    """Normalized pairwise adjacency-distance error.

    Sums |A_tilde_ij - A_ij| over the union of nonzero entries of the
    two matrices and divides by n*k.
    """
    if a.n != a_tilde.n or a.k != a_tilde.k:
        raise DataFormatError("adjacency matrices must share n and k")
    keys_a = a.rows * a.n + a.cols
    keys_b = a_tilde.rows * a_tilde.n + a_tilde.cols
    union = np.union1d(keys_a, keys_b)
    va = np.zeros(union.size)
    vb = np.zeros(union.size)
    va[np.searchsorted(union, keys_a)] = a.distances
    vb[np.searchsorted(union, keys_b)] = a_tilde.distances
    return float(np.sum(np.abs(vb - va)) / (a.n * a.k))


def _pearson_with_p(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    n = x.size
    sx = x - x.mean()
    sy = y - y.mean()
    denom = np.sqrt(np.sum(sx * sx) * np.sum(sy * sy))
    if denom == 0:
        raise AlgorithmFailure("zero-variance signal")
    r = float(np.clip(np.sum(sx * sy) / denom, -1.0, 1.0))
    if abs(r) >= 1.0:
        return r, 0.0
    t = abs(r) * np.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * stats.t.sf(t, n - 2))


def correlation_score(embedding, truth) -> tuple[float, np.ndarray]:
    """Summed component-wise correlation against a ground-truth signal.

    Embeddings are only defined up to per-axis reflection, so each
    component correlation is taken with the sign that makes it
    nonnegative; the two aligned correlations are added.  p-values come
    from the standard t-statistic of the Pearson correlation.
    """
    emb = np.asarray(embedding, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if emb.shape != tru.shape or emb.ndim != 2 or emb.shape[1] != 2:
        raise DataFormatError("embedding and truth must both have shape (n, 2)")
    if emb.shape[0] < 3:
        raise DataFormatError("correlation needs at least 3 samples")
    r_total = 0.0
    p_values = np.empty(2)
    for j in range(2):
        r, p = _pearson_with_p(emb[:, j], tru[:, j])
        r_total += abs(r)
        p_values[j] = p
    return float(r_total), p_values


def fit_curve(xs, ys, kind: str) -> FitReport:
    """Least-squares trend fit with R**2 on the original scale.

    ``linear`` and ``quadratic`` are polynomial least squares;
    ``exponential`` fits y = a * exp(b x) by log-linear least squares
    and requires positive ys.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataFormatError("xs and ys must be equal-length 1-D sequences")
    if kind == "linear":
        min_pts, degree = 2, 1
    elif kind == "quadratic":
        min_pts, degree = 3, 2
    elif kind == "exponential":
        min_pts, degree = 2, 1
    else:
        raise DataFormatError(f"unknown fit kind {kind!r}")
    if x.size < min_pts:
        raise DataFormatError("not enough samples for the requested fit")
    if np.unique(x).size < degree + 1:
        raise DataFormatError("singular design")
    if kind == "exponential":
        if np.any(y <= 0):
            raise DataFormatError("exponential fit requires positive ys")
        slope, intercept = np.polyfit(x, np.log(y), 1)
        params = np.array([np.exp(intercept), slope])   # (a, b)
        fitted = params[0] * np.exp(params[1] * x)
    else:
        params = np.polyfit(x, y, degree)               # highest power first
        fitted = np.polyval(params, x)
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        r2 = 1.0 if ss_res < 1e-24 else -np.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitReport(kind=kind, parameters=params, r_squared=float(r2))

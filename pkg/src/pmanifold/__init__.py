"""Two-dimensional principal manifolds for high-dimensional point clouds.

Builds a grid of cubic smoothing splines over hyperplane slices of the
data, embeds points into signed arc-length coordinates on that grid,
and maps embedded coordinates back to the ambient space.  Ships with
quality metrics, dataset generators, and an Isomap baseline.
"""

from .datasets import GeneratorSpec, noisy_swiss_roll, paraboloid, predator_mobbing
from .errors import AlgorithmFailure, DataFormatError, PManifoldError
from .geometry import (
    PointCloud,
    ReferenceFrame,
    WeightedGraph,
    connected_components,
    dijkstra,
    knn_graph,
    pca2,
    range_graph,
)
from .isomap import IsomapResult, isomap
from .manifold import (
    BuildConfig,
    Geodesic,
    GridNode,
    PrincipalManifold,
    build_manifold,
    intersect_splines,
    longest_geodesic,
)
from .metrics import (
    AdjacencyDistance,
    FitReport,
    adjacency_distance,
    correlation_score,
    delta,
    fit_curve,
)
from .slicing import Cluster, SliceConfig, slab_boundaries, slice_partition, split_subclusters
from .spline import SmoothingSpline, fit_smoothing_spline

__version__ = "0.1.0"

__all__ = [
    "AdjacencyDistance",
    "AlgorithmFailure",
    "BuildConfig",
    "Cluster",
    "DataFormatError",
    "FitReport",
    "GeneratorSpec",
    "Geodesic",
    "GridNode",
    "IsomapResult",
    "PManifoldError",
    "PointCloud",
    "PrincipalManifold",
    "ReferenceFrame",
    "SliceConfig",
    "SmoothingSpline",
    "WeightedGraph",
    "adjacency_distance",
    "build_manifold",
    "connected_components",
    "correlation_score",
    "delta",
    "dijkstra",
    "fit_curve",
    "fit_smoothing_spline",
    "intersect_splines",
    "isomap",
    "knn_graph",
    "longest_geodesic",
    "noisy_swiss_roll",
    "paraboloid",
    "pca2",
    "predator_mobbing",
    "range_graph",
    "slab_boundaries",
    "slice_partition",
    "split_subclusters",
    "__version__",
]

"""Principal-manifold construction, embedding, and inversion.

The pipeline per reference axis: slice the cloud into slabs, split
each slab into connected sub-clusters, trace the longest geodesic of
every sub-cluster, and fit one smoothing spline per geodesic.  The two
spline families are then intersected pairwise into a sparse grid of
virtual intersection nodes; each node carries a signed arc-length
coordinate pair referenced to an origin node through the axis splines.

Embedding a point snaps it to the nearest grid node and adds the
tangential offset of the residual; inversion interpolates the local
grid cell back into the ambient space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlgorithmFailure, DataFormatError
from .geometry import (
    PointCloud,
    ReferenceFrame,
    WeightedGraph,
    connected_components,
    dijkstra,
    dijkstra_all_pairs,
    pairwise_distances,
    pca2,
    range_graph,
    reconstruct_path,
)
from .slicing import SliceConfig, slice_partition, split_subclusters
from .spline import SmoothingSpline, _ternary, closest_parameter, fit_smoothing_spline

EXACT_GEODESIC_LIMIT = 2000


@dataclass
class Geodesic:
    """Shortest path of maximum length within one sub-cluster."""

    indices: np.ndarray             # ordered indices into the member cloud
    points: np.ndarray              # (k, d) path points
    cumulative_lengths: np.ndarray  # (k,), cumulative Euclidean edge lengths

    @property
    def length(self) -> float:
        return float(self.cumulative_lengths[-1])


@dataclass
class GridNode:
    """Virtual intersection of family-1 spline l with family-2 spline m."""

    l: int
    m: int
    t: np.ndarray          # midpoint of the closest-approach segment
    lambda1: float         # closest-approach parameter on the family-1 spline
    lambda2: float         # closest-approach parameter on the family-2 spline
    gap: float             # closest-approach distance
    coord: np.ndarray | None = None   # signed arc-length coordinates

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.coord is not None:
            self.coord = np.asarray(self.coord, dtype=float)


@dataclass
class BuildConfig:
    """Knobs of the grid construction stage."""

    samples_per_spline: int = 200
    gap_threshold: float | None = None    # None: 3 x median adjacent node spacing
    origin_mode: str = "centroid"         # "centroid" (deterministic) or "random"
    origin_seed: int | None = None
    spread: str = "half_extent"

    def __post_init__(self):
        if self.samples_per_spline < 2:
            raise DataFormatError("samples_per_spline must be at least 2")
        if self.origin_mode not in ("centroid", "random"):
            raise DataFormatError("origin_mode must be 'centroid' or 'random'")
        if self.origin_mode == "random" and self.origin_seed is None:
            raise DataFormatError("origin_mode 'random' requires origin_seed")


def longest_geodesic(member_points, radius: float) -> Geodesic:
    """Longest shortest path over the range graph of a point set.

    Exact (Dijkstra from every node) up to 2000 members; beyond that a
    double sweep is used: Dijkstra from node 0, then from its farthest
    node.  Requires the range graph to be connected.
    """
    pts = member_points.points if isinstance(member_points, PointCloud) else np.asarray(member_points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise DataFormatError("longest_geodesic requires at least 2 points")
    graph = range_graph(PointCloud(pts), radius)
    if np.max(connected_components(graph)) > 0:
        raise AlgorithmFailure("geodesic on disconnected cluster")
    if n <= EXACT_GEODESIC_LIMIT:
        dist, pred = dijkstra_all_pairs(graph)
        src, dst = np.unravel_index(int(np.argmax(dist)), dist.shape)
        path = reconstruct_path(pred[src], int(src), int(dst))
    else:
        d0, _ = dijkstra(graph, 0)
        a = int(np.argmax(d0))
        d1, pred1 = dijkstra(graph, a)
        b = int(np.argmax(d1))
        path = reconstruct_path(pred1, a, b)
    idx = np.asarray(path, dtype=int)
    path_pts = pts[idx]
    steps = np.linalg.norm(np.diff(path_pts, axis=0), axis=1)
    return Geodesic(indices=idx, points=path_pts,
                    cumulative_lengths=np.concatenate([[0.0], np.cumsum(steps)]))


def _refine_pair(s1: SmoothingSpline, s2: SmoothingSpline,
                 grid1: np.ndarray, grid2: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """One ternary-search pass per parameter around mesh cell (i, j)."""
    p2 = s2.value(grid2[j])
    lo1 = grid1[max(i - 1, 0)]
    hi1 = grid1[min(i + 1, len(grid1) - 1)]
    lam1 = _ternary(lambda t: float(np.linalg.norm(s1.value(t) - p2)), lo1, hi1)
    p1 = s1.value(lam1)
    lo2 = grid2[max(j - 1, 0)]
    hi2 = grid2[min(j + 1, len(grid2) - 1)]
    lam2 = _ternary(lambda t: float(np.linalg.norm(s2.value(t) - p1)), lo2, hi2)
    return lam1, lam2


def intersect_splines(
    s1: SmoothingSpline,
    s2: SmoothingSpline,
    samples: int = 200,
    gap_threshold: float = math.inf,
    l: int = 0,
    m: int = 0,
    _cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> GridNode | None:
    """Virtual intersection of two splines.

    The closest pair over a samples x samples parameter mesh is refined
    by one local ternary-search pass in each parameter; the node sits at
    the midpoint of the closest-approach segment.  Returns None when the
    refined gap exceeds ``gap_threshold``.
    """
    if samples < 2:
        raise DataFormatError("samples must be at least 2")
    if _cache is not None:
        grid, pts1, pts2 = _cache
        grid1 = grid2 = grid
    else:
        grid1 = grid2 = np.linspace(0.0, 1.0, samples)
        pts1 = s1.value(grid1)
        pts2 = s2.value(grid2)
    dist = pairwise_distances(pts1, pts2)
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    lam1, lam2 = _refine_pair(s1, s2, grid1, grid2, int(i), int(j))
    p1 = s1.value(lam1)
    p2 = s2.value(lam2)
    gap = float(np.linalg.norm(p1 - p2))
    if gap > gap_threshold:
        return None
    return GridNode(l=l, m=m, t=0.5 * (p1 + p2), lambda1=float(lam1), lambda2=float(lam2), gap=gap)


@dataclass
class PrincipalManifold:
    """Two spline families, their intersection grid, and an origin node."""

    splines1: list
    splines2: list
    nodes: dict                     # (l, m) -> GridNode
    origin: tuple
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.origin = (int(self.origin[0]), int(self.origin[1]))
        if self.origin not in self.nodes:
            raise DataFormatError("origin node missing from the grid")
        self._rebuild_caches()

    def _rebuild_caches(self):
        keys = sorted(self.nodes)
        self._keys = keys
        self._key_index = {k: i for i, k in enumerate(keys)}
        self._t = np.stack([self.nodes[k].t for k in keys])
        self._coords = np.stack([self.nodes[k].coord for k in keys])
        # tangents of the splines governing each coordinate, fixed per node
        self._u1 = np.stack([self.splines2[k[1]].tangent(self.nodes[k].lambda2) for k in keys])
        self._u2 = np.stack([self.splines1[k[0]].tangent(self.nodes[k].lambda1) for k in keys])

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def d(self) -> int:
        return self._t.shape[1]

    def node_coords(self) -> np.ndarray:
        """(n_nodes, 2) coordinates in sorted (l, m) order."""
        return self._coords.copy()

    def embed(self, z) -> np.ndarray:
        """Embed point(s) into the two-dimensional manifold coordinates.

        Each point snaps to its nearest grid node (Euclidean, ties to the
        lower (l, m)); the offset to the node is projected onto the local
        spline tangents and added to the node coordinates.
        """
        if self.n_nodes == 0:
            raise AlgorithmFailure("degenerate grid")
        z_arr = np.asarray(z, dtype=float)
        single = z_arr.ndim == 1
        pts = z_arr[None, :] if single else z_arr
        if pts.shape[1] != self.d:
            raise DataFormatError("point dimension does not match the manifold")
        nearest = np.argmin(pairwise_distances(pts, self._t), axis=1)
        delta = pts - self._t[nearest]
        dx1 = np.sum(delta * self._u1[nearest], axis=1)
        dx2 = np.sum(delta * self._u2[nearest], axis=1)
        out = self._coords[nearest] + np.column_stack([dx1, dx2])
        return out[0] if single else out

    def invert(self, x) -> np.ndarray:
        """Map embedding coordinates back to the ambient space.

        The nearest node in embedding coordinates anchors a local frame
        completed by its (l, m+1) and (l+1, m) neighbors, falling back to
        the opposite neighbors at grid borders.
        """
        x_arr = np.asarray(x, dtype=float)
        single = x_arr.ndim == 1
        coords = x_arr[None, :] if single else x_arr
        if coords.shape[1] != 2:
            raise DataFormatError("embedding coordinates must be 2-vectors")
        nearest = np.argmin(pairwise_distances(coords, self._coords), axis=1)
        out = np.empty((coords.shape[0], self.d))
        for row, (xy, idx) in enumerate(zip(coords, nearest)):
            out[row] = self._invert_one(xy, self._keys[int(idx)])
        return out[0] if single else out

    def _neighbor(self, l: int, m: int, dl: int, dm: int) -> GridNode | None:
        return self.nodes.get((l + dl, m + dm))

    def _invert_one(self, x: np.ndarray, key: tuple) -> np.ndarray:
        l, m = key
        base = self.nodes[key]
        y = base.t.copy()
        # alpha moves along the m direction (coordinate 2), beta along l
        # (coordinate 1); each ratio is recomputed for whichever neighbor
        # exists.
        for (dl, dm, axis) in ((0, 1, 1), (1, 0, 0)):
            node = None
            den = 0.0
            for sign in (1, -1):
                cand = self._neighbor(l, m, sign * dl, sign * dm)
                if cand is None:
                    continue
                den = cand.coord[axis] - base.coord[axis]
                if abs(den) >= 1e-12:
                    node = cand
                    break
            if node is None:
                raise AlgorithmFailure("inverse frame incomplete")
            ratio = (x[axis] - base.coord[axis]) / den
            y = y + (node.t - base.t) * ratio
        return y

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "origin": [self.origin[0], self.origin[1]],
            "splines1": [s.to_dict() for s in self.splines1],
            "splines2": [s.to_dict() for s in self.splines2],
            "nodes": [
                {
                    "l": k[0],
                    "m": k[1],
                    "t": self.nodes[k].t.tolist(),
                    "lambda1": self.nodes[k].lambda1,
                    "lambda2": self.nodes[k].lambda2,
                    "gap": self.nodes[k].gap,
                    "coord": self.nodes[k].coord.tolist(),
                }
                for k in sorted(self.nodes)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PrincipalManifold":
        nodes = {}
        for rec in data["nodes"]:
            key = (int(rec["l"]), int(rec["m"]))
            nodes[key] = GridNode(
                l=key[0], m=key[1], t=np.asarray(rec["t"], dtype=float),
                lambda1=float(rec["lambda1"]), lambda2=float(rec["lambda2"]),
                gap=float(rec["gap"]), coord=np.asarray(rec["coord"], dtype=float),
            )
        return cls(
            splines1=[SmoothingSpline.from_dict(s) for s in data["splines1"]],
            splines2=[SmoothingSpline.from_dict(s) for s in data["splines2"]],
            nodes=nodes,
            origin=tuple(data["origin"]),
            config=dict(data.get("config", {})),
        )


def _oriented_geodesic_points(points: np.ndarray, frame: ReferenceFrame) -> np.ndarray:
    """Flip a geodesic so it runs along the +direction of the frame axis
    dominant in its end-to-end chord; keeps every spline of a family
    consistently oriented."""
    chord = points[-1] - points[0]
    p1 = float(chord @ frame.v1)
    p2 = float(chord @ frame.v2)
    dominant = p1 if abs(p1) >= abs(p2) else p2
    if dominant < 0:
        return points[::-1].copy()
    return points


def _fit_family(cloud: PointCloud, frame: ReferenceFrame, axis: int,
                p: float, slice_config: SliceConfig) -> list:
    splines = []
    for slab in slice_partition(cloud, frame, axis, slice_config):
        if slab.size == 0:
            continue
        for sub in split_subclusters(slab, cloud, slice_config):
            radius = slice_config.subcluster_radius_scale * sub.width
            geo = longest_geodesic(cloud.points[sub.member_indices], radius)
            pts = _oriented_geodesic_points(geo.points, frame)
            splines.append(fit_smoothing_spline(pts, p))
    return splines


def _median_adjacent_spacing(nodes: dict) -> float:
    spacings = []
    for (l, m), node in nodes.items():
        for other in ((l + 1, m), (l, m + 1)):
            if other in nodes:
                spacings.append(float(np.linalg.norm(nodes[other].t - node.t)))
    return float(np.median(spacings)) if spacings else math.inf


def _anchor_index(available: list, target: int) -> int:
    return min(available, key=lambda v: (abs(v - target), v))


def _assign_coordinates(nodes: dict, splines1: list, splines2: list,
                        origin: tuple, samples: int) -> None:
    l0, m0 = origin
    origin_node = nodes[origin]
    rows: dict[int, list] = {}
    cols: dict[int, list] = {}
    for (l, m) in nodes:
        rows.setdefault(m, []).append(l)
        cols.setdefault(l, []).append(m)

    # Offsets of each row / column anchor: its displacement from the
    # origin projected on the axis-spline tangent at the origin (the
    # arc position along the axis spline, linearized so curved axis
    # splines cannot snap the projection to a far fold).  The offset
    # corrects the shear of a non-orthogonal grid; applying it at full
    # strength in both coordinates double-counts the obliquity
    # cross-term (and dropping it misses the term with the opposite
    # sign), so it is split evenly between the two coordinates, which
    # makes sheared grids embed isometrically to first order.
    u1_origin = splines2[m0].tangent(origin_node.lambda2)
    u2_origin = splines1[l0].tangent(origin_node.lambda1)
    off1: dict[int, float] = {}
    anchor_l: dict[int, int] = {}
    for m, ls in rows.items():
        la = _anchor_index(ls, l0)
        anchor_l[m] = la
        off1[m] = 0.5 * float((nodes[(la, m)].t - origin_node.t) @ u1_origin)
    off2: dict[int, float] = {}
    anchor_m: dict[int, int] = {}
    for l, ms in cols.items():
        mb = _anchor_index(ms, m0)
        anchor_m[l] = mb
        off2[l] = 0.5 * float((nodes[(l, mb)].t - origin_node.t) @ u2_origin)

    for (l, m), node in nodes.items():
        la = anchor_l[m]
        leg1 = splines2[m].arc_length(nodes[(la, m)].lambda2, node.lambda2)
        mb = anchor_m[l]
        leg2 = splines1[l].arc_length(nodes[(l, mb)].lambda1, node.lambda1)
        node.coord = np.array([leg1 + off1[m], leg2 + off2[l]])


def build_manifold(
    cloud: PointCloud,
    p: float,
    slice_config: SliceConfig,
    build_config: BuildConfig | None = None,
    frame: ReferenceFrame | None = None,
) -> PrincipalManifold:
    """Construct the principal manifold of a point cloud.

    Parameters
    ----------
    cloud : PointCloud
        Input points; must admit a two-component PCA unless ``frame`` is
        supplied.
    p : float
        Smoothing weight passed to every spline fit.
    slice_config : SliceConfig
        Cluster counts and sub-cluster thresholds.
    build_config : BuildConfig, optional
        Grid construction knobs (mesh size, gap threshold, origin rule).
    frame : ReferenceFrame, optional
        Reference frame override; defaults to ``pca2`` of the cloud.

    Returns
    -------
    PrincipalManifold
        Spline families, the filtered intersection grid with signed
        arc-length coordinates, and the origin node.
    """
    cfg = build_config or BuildConfig()
    if frame is None:
        frame = pca2(cloud, spread=cfg.spread)
    splines1 = _fit_family(cloud, frame, 1, p, slice_config)
    splines2 = _fit_family(cloud, frame, 2, p, slice_config)
    if not splines1 or not splines2:
        raise AlgorithmFailure("degenerate grid")

    samples = cfg.samples_per_spline
    grid = np.linspace(0.0, 1.0, samples)
    vals1 = [s.value(grid) for s in splines1]
    vals2 = [s.value(grid) for s in splines2]
    candidates: dict[tuple, GridNode] = {}
    for l, s1 in enumerate(splines1):
        for m, s2 in enumerate(splines2):
            node = intersect_splines(s1, s2, samples=samples, l=l, m=m,
                                     _cache=(grid, vals1[l], vals2[m]))
            candidates[(l, m)] = node

    if cfg.gap_threshold is not None:
        threshold = float(cfg.gap_threshold)
    else:
        threshold = 3.0 * _median_adjacent_spacing(candidates)
    nodes = {k: v for k, v in candidates.items() if v.gap <= threshold}
    if not nodes:
        raise AlgorithmFailure("degenerate grid")

    keys = sorted(nodes)
    if cfg.origin_mode == "random":
        rng = np.random.default_rng(cfg.origin_seed)
        origin = keys[int(rng.integers(len(keys)))]
    else:
        centroid = cloud.points.mean(axis=0)
        t_all = np.stack([nodes[k].t for k in keys])
        origin = keys[int(np.argmin(np.linalg.norm(t_all - centroid, axis=1)))]

    _assign_coordinates(nodes, splines1, splines2, origin, samples)

    config = {
        "p": float(min(max(p, 1e-6), 1.0)),
        "n_c1": slice_config.n_c1,
        "n_c2": slice_config.n_c2,
        "min_subcluster_size": slice_config.min_subcluster_size,
        "subcluster_radius_scale": slice_config.subcluster_radius_scale,
        "samples_per_spline": cfg.samples_per_spline,
        "gap_threshold": cfg.gap_threshold,
        "gap_threshold_used": threshold,
        "origin_mode": cfg.origin_mode,
        "origin_seed": cfg.origin_seed,
        "spread": cfg.spread,
    }
    return PrincipalManifold(splines1=splines1, splines2=splines2,
                             nodes=nodes, origin=origin, config=config)

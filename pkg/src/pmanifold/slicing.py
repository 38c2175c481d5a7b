"""Partition a cloud into slabs per reference axis and split slabs
into connected sub-clusters.

Slab membership uses the scalar-projection interval test, which is
algebraically equivalent to the angle inequalities on the slab
interior but stays defined on the boundary hyperplanes.  Points
falling beyond the first or last boundary are clamped into the end
slabs so every point is assigned exactly once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .geometry import PointCloud, ReferenceFrame, connected_components, range_graph


@dataclass
class SliceConfig:
    """Cluster counts per reference axis plus sub-cluster thresholds.

    ``min_subcluster_size`` drops small connected components as outliers;
    ``subcluster_radius_scale`` multiplies the slab width to give the
    range-search radius used for the split.
    """

    n_c1: int
    n_c2: int
    min_subcluster_size: int = 4
    subcluster_radius_scale: float = 1.0

    def __post_init__(self):
        if self.n_c1 < 1 or self.n_c2 < 1:
            raise DataFormatError("cluster counts must be at least 1")
        if self.min_subcluster_size < 1:
            raise DataFormatError("min_subcluster_size must be at least 1")
        if self.subcluster_radius_scale <= 0:
            raise DataFormatError("subcluster_radius_scale must be positive")

    def n_c(self, axis: int) -> int:
        return self.n_c1 if axis == 1 else self.n_c2


@dataclass
class Cluster:
    """Points of one slab (or one connected sub-cluster of a slab)."""

    axis: int                    # 1 or 2
    slab_index: int              # 1-based slab position along the axis
    subcluster_index: int        # 0-based within the slab, -1 before splitting
    member_indices: np.ndarray   # ascending indices into the parent cloud
    width: float                 # slab width 2 * sigma_axis / n_c

    def __post_init__(self):
        self.member_indices = np.asarray(self.member_indices, dtype=int)

    @property
    def size(self) -> int:
        return self.member_indices.size


def slab_boundaries(frame: ReferenceFrame, axis: int, n_c: int) -> np.ndarray:
    """Boundary points a_0 ... a_{n_c} dividing mu - v*sigma .. mu + v*sigma.

    a_j = mu + v * sigma * (2j - n_c) / n_c, so a_0 and a_{n_c} sit at the
    extreme reference positions on the axis.
    """
    if n_c < 1:
        raise DataFormatError("n_c must be at least 1")
    if axis not in (1, 2):
        raise DataFormatError("axis must be 1 or 2")
    j = np.arange(n_c + 1, dtype=float)
    factors = frame.spread(axis) * (2.0 * j - n_c) / n_c
    return frame.mu[None, :] + factors[:, None] * frame.direction(axis)[None, :]


def slice_partition(
    cloud: PointCloud, frame: ReferenceFrame, axis: int, config: SliceConfig
) -> list[Cluster]:
    """Assign every point to exactly one slab along a reference axis.

    A point with scalar projection s (in slab-width units from the first
    boundary) lands in slab j when s is in (j-1, j]; s <= 0 clamps to
    slab 1 and s > n_c clamps to slab n_c.  Returns one Cluster per slab,
    empty slabs included.
    """
    if axis not in (1, 2):
        raise DataFormatError("axis must be 1 or 2")
    n_c = config.n_c(axis)
    v = frame.direction(axis)
    sigma = frame.spread(axis)
    width = 2.0 * sigma / n_c
    a0 = frame.mu - v * sigma
    if cloud.n == 0:
        return [
            Cluster(axis=axis, slab_index=j, subcluster_index=-1,
                    member_indices=np.empty(0, dtype=int), width=width)
            for j in range(1, n_c + 1)
        ]
    if width <= 0:
        # Zero spread: everything collapses into the first slab.
        slabs = np.ones(cloud.n, dtype=int)
    else:
        s = (cloud.points - a0[None, :]) @ v / width
        slabs = np.ceil(s).astype(int)
        np.clip(slabs, 1, n_c, out=slabs)
    return [
        Cluster(axis=axis, slab_index=j, subcluster_index=-1,
                member_indices=np.flatnonzero(slabs == j), width=width)
        for j in range(1, n_c + 1)
    ]


def split_subclusters(cluster: Cluster, cloud: PointCloud, config: SliceConfig) -> list[Cluster]:
    """Split a slab into connected components of its range graph.

    The range radius is ``subcluster_radius_scale * width``.  Components
    smaller than ``min_subcluster_size`` are discarded as outliers; the
    survivors get sub-cluster indices in order of their smallest member.
    """
    if cluster.size == 0:
        raise DataFormatError("cannot split an empty cluster")
    members = cluster.member_indices
    radius = config.subcluster_radius_scale * cluster.width
    if radius <= 0 or members.size == 1:
        groups = [members] if members.size else []
    else:
        graph = range_graph(cloud.subset(members), radius)
        labels = connected_components(graph)
        groups = [members[labels == lab] for lab in range(labels.max() + 1)]
    out = []
    for group in groups:
        if group.size < config.min_subcluster_size:
            continue
        out.append(
            Cluster(axis=cluster.axis, slab_index=cluster.slab_index,
                    subcluster_index=len(out), member_indices=group, width=cluster.width)
        )
    return out

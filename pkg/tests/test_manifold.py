import json

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from pmanifold.errors import AlgorithmFailure
from pmanifold.geometry import PointCloud, ReferenceFrame, pca2
from pmanifold.manifold import (
    BuildConfig,
    PrincipalManifold,
    _assign_coordinates,
    build_manifold,
    intersect_splines,
    longest_geodesic,
)
from pmanifold.slicing import SliceConfig
from pmanifold.spline import fit_smoothing_spline


def axis_frame(cloud):
    mu = cloud.points.mean(axis=0)
    c = cloud.points - mu
    v1 = np.zeros(cloud.d)
    v1[0] = 1.0
    v2 = np.zeros(cloud.d)
    v2[1] = 1.0
    return ReferenceFrame(mu=mu, v1=v1, v2=v2,
                          sigma1=float(np.max(np.abs(c @ v1))),
                          sigma2=float(np.max(np.abs(c @ v2))))


def flat_patch(seed=1, n=1000):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 1, (n, 2))
    return PointCloud(np.column_stack([xy, np.zeros(n)]))


def hand_grid_manifold(size=6, spacing=1.0):
    """Straight axis-aligned splines with unit-spacing intersections."""
    lines1, lines2 = [], []
    span = np.linspace(0, (size - 1) * spacing, size)
    for l in range(size):
        pts = np.column_stack([np.full(size, l * spacing), span, np.zeros(size)])
        lines1.append(fit_smoothing_spline(pts, 1.0))
    for m in range(size):
        pts = np.column_stack([span, np.full(size, m * spacing), np.zeros(size)])
        lines2.append(fit_smoothing_spline(pts, 1.0))
    nodes = {}
    for l, s1 in enumerate(lines1):
        for m, s2 in enumerate(lines2):
            nodes[(l, m)] = intersect_splines(s1, s2, samples=200, l=l, m=m)
    _assign_coordinates(nodes, lines1, lines2, (0, 0), 200)
    return PrincipalManifold(splines1=lines1, splines2=lines2, nodes=nodes, origin=(0, 0))


class TestLongestGeodesic:
    def test_three_collinear_points(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        geo = longest_geodesic(pts, 1.5)
        assert sorted([geo.indices[0], geo.indices[-1]]) == [0, 2]
        assert list(geo.indices) in ([0, 1, 2], [2, 1, 0])
        assert geo.length == pytest.approx(2.0)

    def test_two_points(self):
        geo = longest_geodesic(np.array([[0.0, 0.0], [1.0, 1.0]]), 2.0)
        assert len(geo.indices) == 2
        assert geo.length == pytest.approx(np.sqrt(2))

    def test_matches_all_pairs_oracle(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(size=(40, 2))
        radius = 0.35
        geo = longest_geodesic(pts, radius)
        # exhaustive oracle: dijkstra from every node via scipy on an
        # independently assembled dense matrix
        from scipy.sparse.csgraph import dijkstra as sp_dijkstra

        n = len(pts)
        dense = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                d = np.linalg.norm(pts[i] - pts[j])
                if i != j and d <= radius:
                    dense[i, j] = d
        dist = sp_dijkstra(dense)
        assert geo.length == pytest.approx(np.max(dist[np.isfinite(dist)]))

    def test_disconnected_rejected(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [9.0, 9.0], [9.1, 9.0]])
        with pytest.raises(AlgorithmFailure, match="disconnected"):
            longest_geodesic(pts, 0.5)

    def test_path_is_simple_and_adjacent(self):
        rng = np.random.default_rng(9)
        pts = rng.uniform(size=(60, 2))
        geo = longest_geodesic(pts, 0.3)
        assert len(set(geo.indices.tolist())) == len(geo.indices)
        steps = np.linalg.norm(np.diff(geo.points, axis=0), axis=1)
        assert np.all(steps <= 0.3 + 1e-12)
        assert np.allclose(np.concatenate([[0.0], np.cumsum(steps)]), geo.cumulative_lengths)


class TestIntersectSplines:
    def test_perpendicular_crossing(self):
        s1 = fit_smoothing_spline(np.array([[0, 0], [2, 2]], float), 1.0)
        s2 = fit_smoothing_spline(np.array([[0, 2], [2, 0]], float), 1.0)
        node = intersect_splines(s1, s2)
        assert np.allclose(node.t, [1, 1], atol=1e-6)
        assert node.gap < 1e-6

    def test_parallel_segments_midpoint(self):
        s1 = fit_smoothing_spline(np.array([[0, 0], [1, 0]], float), 1.0)
        s2 = fit_smoothing_spline(np.array([[0, 2], [1, 2]], float), 1.0)
        node = intersect_splines(s1, s2)
        assert node.gap == pytest.approx(2.0)
        assert node.t[1] == pytest.approx(1.0)

    def test_skew_lines_closed_form(self):
        # perpendicular skew lines in 3-D: closest approach known exactly
        s1 = fit_smoothing_spline(np.array([[-1, 0, 0], [1, 0, 0]], float), 1.0)
        s2 = fit_smoothing_spline(np.array([[0.25, -1, 0.5], [0.25, 1, 0.5]], float), 1.0)
        node = intersect_splines(s1, s2)
        assert np.allclose(node.t, [0.25, 0.0, 0.25], atol=1e-6)
        assert node.gap == pytest.approx(0.5, abs=1e-9)

    def test_gap_threshold_filters(self):
        s1 = fit_smoothing_spline(np.array([[0, 0], [1, 0]], float), 1.0)
        s2 = fit_smoothing_spline(np.array([[0, 2], [1, 2]], float), 1.0)
        assert intersect_splines(s1, s2, gap_threshold=1.0) is None

    def test_midpoint_invariant(self):
        rng = np.random.default_rng(10)
        s1 = fit_smoothing_spline(rng.normal(size=(5, 3)), 0.8)
        s2 = fit_smoothing_spline(rng.normal(size=(5, 3)), 0.8)
        node = intersect_splines(s1, s2)
        p1 = s1.value(node.lambda1)
        p2 = s2.value(node.lambda2)
        assert np.allclose(node.t, 0.5 * (p1 + p2), atol=1e-9)
        assert node.gap >= 0


class TestHandGridEmbedInvert:
    def test_node_coords_are_grid_indices(self):
        man = hand_grid_manifold()
        for (l, m), node in man.nodes.items():
            assert np.allclose(node.coord, [l, m], atol=1e-8)

    def test_embed_origin_is_zero(self):
        man = hand_grid_manifold()
        assert np.allclose(man.embed(man.nodes[man.origin].t), [0, 0], atol=1e-12)

    def test_embed_node_returns_stored_coord(self):
        man = hand_grid_manifold()
        node = man.nodes[(3, 1)]
        assert np.allclose(man.embed(node.t), node.coord, atol=1e-9)

    def test_embed_offset_point(self):
        man = hand_grid_manifold()
        z = man.nodes[(2, 3)].t + np.array([0.3, 0.4, 0.0])
        assert np.allclose(man.embed(z), [2.3, 3.4], atol=1e-8)

    def test_invert_node_exact(self):
        man = hand_grid_manifold()
        node = man.nodes[(2, 3)]
        assert np.allclose(man.invert(node.coord), node.t, atol=1e-9)

    def test_invert_cell_midpoint(self):
        man = hand_grid_manifold()
        base, right, up = man.nodes[(2, 3)], man.nodes[(3, 3)], man.nodes[(2, 4)]
        x = base.coord + 0.5 * (up.coord - base.coord) + 0.5 * (right.coord - base.coord)
        expect = base.t + 0.5 * (up.t - base.t) + 0.5 * (right.t - base.t)
        assert np.allclose(man.invert(x), expect, atol=1e-9)

    def test_invert_border_fallback(self):
        man = hand_grid_manifold()
        corner = man.nodes[(5, 5)]
        assert np.allclose(man.invert(corner.coord), corner.t, atol=1e-8)


class TestBuildManifold:
    def test_flat_patch_grid(self):
        cloud = flat_patch(seed=1)
        man = build_manifold(cloud, 0.9, SliceConfig(5, 5), frame=axis_frame(cloud))
        assert 20 <= man.n_nodes <= 25
        # node coordinates reproduce the (x, y) offsets from the origin
        # node (up to the per-axis sign freedom of the chart)
        t0 = man.nodes[man.origin].t
        coords = np.array([nd.coord for nd in man.nodes.values()])
        offsets = np.array([nd.t - t0 for nd in man.nodes.values()])[:, :2]
        best = min(
            np.max(np.abs(np.column_stack([s1 * coords[:, 0], s2 * coords[:, 1]]) - offsets))
            for s1 in (1, -1) for s2 in (1, -1)
        )
        assert best <= 0.05

    def test_grid_coordinate_consistency(self):
        cloud = flat_patch(seed=2, n=600)
        man = build_manifold(cloud, 0.9, SliceConfig(4, 4), frame=axis_frame(cloud))
        from pmanifold.manifold import _assign_coordinates

        stored = {k: nd.coord.copy() for k, nd in man.nodes.items()}
        _assign_coordinates(man.nodes, man.splines1, man.splines2, man.origin,
                            man.config["samples_per_spline"])
        for k, nd in man.nodes.items():
            assert np.allclose(stored[k], nd.coord, atol=1e-6)

    def test_embedding_locality(self):
        cloud = flat_patch(seed=3, n=500)
        man = build_manifold(cloud, 0.9, SliceConfig(4, 4), frame=axis_frame(cloud))
        t = np.array([nd.t for nd in man.nodes.values()])
        for z in cloud.points[::50]:
            d = np.linalg.norm(t - z, axis=1)
            assert d.min() <= np.max(np.min(np.linalg.norm(
                t[None] - cloud.points[:, None, :], axis=2), axis=1))

    def test_rigid_motion_equivariance(self):
        cloud = flat_patch(seed=4, n=400)
        man = build_manifold(cloud, 0.9, SliceConfig(4, 4))
        emb = man.embed(cloud.points)
        theta = 0.37
        rot = np.array([
            [np.cos(theta), -np.sin(theta), 0],
            [np.sin(theta), np.cos(theta), 0],
            [0, 0, 1.0],
        ])
        moved = PointCloud(cloud.points @ rot.T + np.array([2.0, -1.0, 3.0]))
        man2 = build_manifold(moved, 0.9, SliceConfig(4, 4))
        emb2 = man2.embed(moved.points)
        assert np.max(np.abs(pdist(emb) - pdist(emb2))) < 1e-3

    def test_degenerate_grid_rejected(self):
        # collinear-ish data has no second spread direction
        pts = np.column_stack([np.linspace(0, 1, 30), np.zeros(30), np.zeros(30)])
        with pytest.raises(AlgorithmFailure):
            build_manifold(PointCloud(pts), 0.9, SliceConfig(3, 3))

    def test_random_origin_seeded(self):
        cloud = flat_patch(seed=5, n=400)
        cfg_a = BuildConfig(origin_mode="random", origin_seed=11)
        cfg_b = BuildConfig(origin_mode="random", origin_seed=11)
        m1 = build_manifold(cloud, 0.9, SliceConfig(4, 4), cfg_a, frame=axis_frame(cloud))
        m2 = build_manifold(cloud, 0.9, SliceConfig(4, 4), cfg_b, frame=axis_frame(cloud))
        assert m1.origin == m2.origin
        np.testing.assert_array_equal(m1.node_coords(), m2.node_coords())

    def test_explicit_gap_threshold_echoed(self):
        cloud = flat_patch(seed=6, n=400)
        man = build_manifold(cloud, 0.9, SliceConfig(4, 4),
                             BuildConfig(gap_threshold=0.5), frame=axis_frame(cloud))
        assert man.config["gap_threshold"] == 0.5
        assert man.config["gap_threshold_used"] == 0.5
        assert all(nd.gap <= 0.5 for nd in man.nodes.values())


class TestSerialization:
    def test_round_trip_bit_exact(self):
        cloud = flat_patch(seed=7, n=400)
        man = build_manifold(cloud, 0.85, SliceConfig(4, 4), frame=axis_frame(cloud))
        payload = json.dumps(man.to_dict())
        clone = PrincipalManifold.from_dict(json.loads(payload))
        assert clone.origin == man.origin
        assert sorted(clone.nodes) == sorted(man.nodes)
        for k in man.nodes:
            assert np.array_equal(clone.nodes[k].t, man.nodes[k].t)
            assert np.array_equal(clone.nodes[k].coord, man.nodes[k].coord)
            assert clone.nodes[k].lambda1 == man.nodes[k].lambda1
            assert clone.nodes[k].gap == man.nodes[k].gap
        for s_new, s_old in zip(clone.splines1 + clone.splines2, man.splines1 + man.splines2):
            assert np.array_equal(s_new.knots, s_old.knots)
            assert np.array_equal(s_new.coefficients, s_old.coefficients)
        # embeddings computed from the reloaded model are identical
        probe = cloud.points[::37]
        np.testing.assert_array_equal(man.embed(probe), clone.embed(probe))
